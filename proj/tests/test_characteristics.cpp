#include <maslov/body.hpp>
#include <maslov/characteristics.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace maslov;

namespace {

const std::vector<double> E2{1.0, std::pow(2.0, 0.25)};

// planar orbit j of the ellipsoid written out directly
Vec planar_point(const std::vector<double>& r, int j, double t)
{
    int n = int(r.size());
    Vec y = Vec::Zero(2 * n);
    double w = 1.0 / (2 * r[j] * r[j]);
    y(j) = std::sqrt(2.0) * r[j] * std::cos(w * t);
    y(n + j) = std::sqrt(2.0) * r[j] * std::sin(w * t);
    return y;
}

} // namespace

TEST(Body, EllipsoidGauge)
{
    auto b = make_ellipsoid(E2);
    Vec y = planar_point(E2, 1, 0.3);
    EXPECT_NEAR(b.F(y), 1.0, 1e-14);
    EXPECT_NEAR(b.normal(y).dot(y), 1.0, 1e-14);
    EXPECT_GT(convexity_spot_check(b), 0.0);
    EXPECT_THROW(make_ellipsoid({1.0, -1.0}), InputError);
}

TEST(Body, QuarticReducesToEllipsoid)
{
    auto e = make_ellipsoid(E2);
    auto q0 = make_quartic_perturbed(E2, 0.0);
    auto q = make_quartic_perturbed(E2, 0.05);
    Vec z(4);
    z << 0.3, -0.7, 0.2, 0.9;
    EXPECT_NEAR(e.F(z), q0.F(z), 1e-14);
    EXPECT_GT(q.F(z), e.F(z));
    EXPECT_GT(convexity_spot_check(q), 0.0);
    // finite-difference gradient
    Vec g = q.dF(z);
    for (int i = 0; i < 4; ++i) {
        Vec h = Vec::Zero(4);
        h(i) = 1e-6;
        EXPECT_NEAR((q.F(z + h) - q.F(z - h)) / 2e-6, g(i), 1e-8);
    }
    // F is 2-homogeneous
    EXPECT_NEAR(q.F(2.0 * z), 4.0 * q.F(z), 1e-12);
}

TEST(Flow, MatchesExactOrbitOverTenPeriods)
{
    auto b = make_ellipsoid(E2);
    for (int j = 0; j < 2; ++j) {
        double tau = 4 * M_PI * E2[j] * E2[j];
        auto tr = integrate_flow(b, planar_point(E2, j, 0), 10 * tau, 200);
        double err = 0;
        for (size_t k = 0; k < tr.t.size(); ++k) err = std::max(err, (tr.y[k] - planar_point(E2, j, tr.t[k])).norm());
        EXPECT_LE(err, 1e-8) << j;
        EXPECT_LE(tr.max_energy_drift, 1e-9);
    }
}

TEST(Flow, TimeReversal)
{
    auto b = make_quartic_perturbed(E2, 0.05);
    Vec y0(4);
    y0 << 0.5, 0.2, 0.4, -0.3;
    y0 = b.project(y0);
    auto fwd = integrate_flow(b, y0, 7.0, 16);
    auto back = integrate_flow(b, fwd.y.back(), -7.0, 16);
    EXPECT_LE((back.y.back() - y0).norm(), 1e-7);
    EXPECT_LE(fwd.max_energy_drift, 1e-9);
}

TEST(Flow, RejectsOffBoundaryStart)
{
    auto b = make_ellipsoid(E2);
    Vec y = 2.0 * planar_point(E2, 0, 0);
    EXPECT_THROW(integrate_flow(b, y, 1.0), InputError);
}

TEST(Monodromy, NumericMatchesExact)
{
    auto b = make_ellipsoid(E2);
    for (int j = 0; j < 2; ++j) {
        double tau = ellipsoid_period(E2, j);
        auto p = monodromy(b, planar_point(E2, j, 0), tau, 64);
        EXPECT_LE((p.end_value() - ellipsoid_monodromy_at(E2, j, tau)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((p.evaluate(0.25 * tau) - ellipsoid_monodromy_at(E2, j, 0.25 * tau)).cwiseAbs().maxCoeff(), 1e-8);
        // between samples the path is interpolated, error O(h^2)
        EXPECT_LE((p.evaluate(0.4 * tau) - ellipsoid_monodromy_at(E2, j, 0.4 * tau)).cwiseAbs().maxCoeff(), 0.05);
        EXPECT_LE(symplectic_defect(p.end_value()), 1e-9);
    }
}

TEST(Classify, SyntheticMonodromies)
{
    auto h = classify(diamond(nf_N1(1, 1), nf_D(2)));
    EXPECT_TRUE(h.nondegenerate);
    EXPECT_TRUE(h.hyperbolic);
    EXPECT_FALSE(h.elliptic);

    auto deg = classify(diamond(nf_N1(1, 1), nf_N1(1, 1)));
    EXPECT_FALSE(deg.nondegenerate);
    EXPECT_TRUE(deg.elliptic);

    auto e = classify(diamond(nf_N1(1, 1), nf_R(1.0)));
    EXPECT_TRUE(e.nondegenerate);
    EXPECT_TRUE(e.elliptic);
    EXPECT_FALSE(e.hyperbolic);
}

TEST(Characteristics, ExactEllipsoidOrbits)
{
    auto b = make_ellipsoid({1.3, 1.0});
    auto orbits = ellipsoid_characteristics(b, 64);
    ASSERT_EQ(orbits.size(), 2u);
    EXPECT_NEAR(orbits[0].tau, 4 * M_PI, 1e-12);
    EXPECT_NEAR(orbits[1].tau, 4 * M_PI * 1.69, 1e-12);
    for (const auto& o : orbits) {
        EXPECT_TRUE(o.flags.prime);
        EXPECT_TRUE(o.flags.elliptic);
        EXPECT_TRUE(o.flags.nondegenerate);
        EXPECT_NEAR(o.monodromy_end.determinant(), 1.0, 1e-10);
    }
}

TEST(Characteristics, OrbitIndicesOnEllipsoid)
{
    auto b = make_ellipsoid(E2);
    auto orbits = ellipsoid_characteristics(b, 64);
    std::vector<int> expect_i1{2, 4};
    for (size_t j = 0; j < 2; ++j) {
        auto t = orbit_indices(orbits[j], 20, 6);
        EXPECT_TRUE(t.mismatches.empty());
        EXPECT_EQ(t.i1, expect_i1[j]);
        EXPECT_EQ(t.nu1, 1);
        EXPECT_EQ(t.ekeland_index(1), expect_i1[j] - 2);
    }
}

TEST(Search, RecoversEllipsoidOrbits)
{
    auto b = make_ellipsoid(E2);
    auto res = find_periodic_orbits(b);
    ASSERT_EQ(res.orbits.size(), 2u);
    for (int j = 0; j < 2; ++j) {
        double tau = ellipsoid_period(E2, j);
        EXPECT_NEAR(res.orbits[j].tau, tau, 1e-7 * tau);
        EXPECT_TRUE(res.orbits[j].flags.prime);
        EXPECT_TRUE(res.orbits[j].flags.elliptic);
        // the found loop lies on the planar circle
        double rad = std::sqrt(2.0) * E2[j];
        for (const auto& y : res.orbits[j].trajectory) EXPECT_NEAR(y.norm(), rad, 1e-7);
    }
}

TEST(Search, DoubleTraversalIsNotPrime)
{
    auto b = make_ellipsoid(E2);
    double tau = ellipsoid_period(E2, 0);
    auto o = make_orbit(b, planar_point(E2, 0, 0), 2 * tau);
    EXPECT_EQ(o.multiplicity, 2);
    EXPECT_FALSE(o.flags.prime);
    auto once = make_orbit(b, planar_point(E2, 0, 0), tau);
    EXPECT_EQ(once.multiplicity, 1);
    EXPECT_TRUE(once.flags.prime);
    EXPECT_LE(once.closing_error, 1e-9);
}

TEST(Search, QuarticPlanarOrbits)
{
    auto b = make_quartic_perturbed(E2, 0.05);
    auto res = find_periodic_orbits(b);
    ASSERT_GE(res.orbits.size(), 2u);
    for (const auto& o : res.orbits) {
        EXPECT_LE(o.closing_error, 1e-8);
        EXPECT_LE(o.energy_drift, 1e-9);
        EXPECT_TRUE(o.flags.prime);
    }
}
