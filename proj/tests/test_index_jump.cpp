#include <maslov/characteristics.hpp>
#include <maslov/index_jump.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace maslov;

namespace {

// Ellipsoid iterates counted directly from the frequency ratios (non-resonant radii):
// i(y_j, m) = n + 2(m - 1) + 2 sum_{i != j} floor(m r_j^2 / r_i^2)
long long ellipsoid_index(const std::vector<double>& r, int j, int m)
{
    long long v = long(r.size()) + 2 * (m - 1);
    for (size_t i = 0; i < r.size(); ++i)
        if (int(i) != j) v += 2 * (long long)std::floor(m * r[j] * r[j] / (r[i] * r[i]));
    return v;
}

std::vector<OrbitIndexData> ellipsoid_data(const std::vector<double>& r)
{
    std::vector<OrbitIndexData> out;
    for (int j = 0; j < int(r.size()); ++j) {
        auto d = decompose(ellipsoid_monodromy_at(r, j, ellipsoid_period(r, j)));
        out.push_back(OrbitIndexData::make(d, int(ellipsoid_index(r, j, 1)), 1));
    }
    return out;
}

const std::vector<double> E2{1.0, std::pow(2.0, 0.25)};
const std::vector<double> E3{1.0, std::pow(2.0, 0.25), std::pow(5.0, 0.25)};

} // namespace

TEST(OrbitData, EllipsoidClosedFormsMatchFrequencyCount)
{
    for (const auto& r : {E2, E3}) {
        auto data = ellipsoid_data(r);
        for (int j = 0; j < int(r.size()); ++j) {
            EXPECT_EQ(data[j].d.p_minus, 1);
            EXPECT_EQ(data[j].d.r, int(r.size()) - 1);
            EXPECT_EQ(data[j].s_plus(), 1);
            for (int m = 1; m <= 60; ++m) {
                EXPECT_EQ(data[j].index(m), ellipsoid_index(r, j, m)) << j << " m=" << m;
                EXPECT_EQ(data[j].nullity(m), 1);
            }
            // mean index 2 sum_i r_j^2 / r_i^2
            double mean = 0;
            for (double ri : r) mean += 2 * r[j] * r[j] / (ri * ri);
            EXPECT_NEAR(data[j].mean(), mean, 1e-9);
        }
    }
}

TEST(Jump, SingleOrbitByHand)
{
    // N1(1,1) with i1 = 1, nu1 = 1: i(m) = 2m - 1, nu = 1, S+ = 1, e = 2
    NormalFormDecomposition d;
    d.n = 1;
    d.p_minus = 1;
    auto o = OrbitIndexData::make(d, 1, 1);
    auto c = find_common_jump({o}, 100);
    ASSERT_TRUE(c.found);
    ASSERT_EQ(c.m.size(), 1u);
    long long T = c.T;
    int m = c.m[0];
    auto idx = [](long long k) { return 2 * k - 1; };
    EXPECT_GE(idx(2 * m), 2 * T - 1);
    EXPECT_LE(idx(2 * m) + 1, 2 * T);
    EXPECT_EQ(idx(2 * m + 1), 2 * T + 1);
    EXPECT_EQ(idx(2 * m - 1) + 1, 2 * T - (1 + 2 - 1));
    EXPECT_EQ(T, 2); // T = 1 would need i(2m - 1) = -1, i.e. m = 0
    EXPECT_TRUE(verify_certificate(c, {o}));
}

TEST(Jump, EllipsoidCertificates)
{
    auto d2 = ellipsoid_data(E2);
    auto c2 = find_common_jump(d2, 100000);
    ASSERT_TRUE(c2.found);
    EXPECT_EQ(c2.T, 10);
    EXPECT_TRUE(verify_certificate(c2, d2));
    // re-check the two outer conditions with the frequency count
    for (int j = 0; j < 2; ++j) {
        EXPECT_EQ(ellipsoid_index(E2, j, 2 * c2.m[j] + 1), 2 * c2.T + ellipsoid_index(E2, j, 1));
        EXPECT_EQ(ellipsoid_index(E2, j, 2 * c2.m[j] - 1) + 1, 2 * c2.T - ellipsoid_index(E2, j, 1) - 2 + 1);
    }

    auto d3 = ellipsoid_data(E3);
    auto c3 = find_common_jump(d3, 100000);
    ASSERT_TRUE(c3.found);
    EXPECT_TRUE(verify_certificate(c3, d3));
    for (int j = 0; j < 3; ++j)
        EXPECT_EQ(ellipsoid_index(E3, j, 2 * c3.m[j] + 1), 2 * c3.T + ellipsoid_index(E3, j, 1));
}

TEST(Jump, TamperedCertificateFails)
{
    auto d2 = ellipsoid_data(E2);
    auto c = find_common_jump(d2, 1000);
    ASSERT_TRUE(c.found);
    c.T += 1;
    EXPECT_FALSE(verify_certificate(c, d2));
}

TEST(Jump, InputValidation)
{
    EXPECT_THROW(find_common_jump({}, 10), InputError);
    NormalFormDecomposition d;
    d.n = 1;
    d.p_zero = 1;
    auto o = OrbitIndexData::make(d, -1, 2); // constant path: mean index 0
    EXPECT_THROW(find_common_jump({o}, 10), InputError);
}

TEST(Rho, Examples)
{
    // floor((2 + 2 - 1 + 2) / 2) = 2
    EXPECT_EQ(rho_n({{2, 1, 1}}, 2), 2);
    // floor((3 + 2 - 1 + 2) / 2) = 3
    EXPECT_EQ(rho_n({{3, 1, 1}}, 2), 3);
    EXPECT_EQ(rho_n({{3, 1, 1}, {2, 1, 1}}, 2), 2);
    // negative numerator rounds down
    EXPECT_EQ(rho_n({{-4, 0, 1}}, 2), -2);
    EXPECT_THROW(rho_n({}, 2), InputError);

    auto d3 = ellipsoid_data(E3);
    std::vector<RhoInput> in;
    for (const auto& o : d3) in.push_back({o.i1, o.s_plus(), o.nu1});
    // smallest orbit has i1 = n: floor((3 + 2 - 1 + 3) / 2)
    EXPECT_EQ(rho_n(in, 3), 3);
}

TEST(IndexSum, HoldsOnEllipsoids)
{
    for (const auto& r : {E2, E3}) {
        for (const auto& o : ellipsoid_data(r)) {
            auto rep = check_index_sum_estimate(closed_form_table(o, 80), o.e());
            EXPECT_TRUE(rep.holds);
            EXPECT_TRUE(rep.weak_holds);
            EXPECT_GE(rep.min_margin, 0);
            EXPECT_EQ(rep.first_violation, 0);
        }
    }
}

TEST(IndexSum, DetectsViolation)
{
    std::vector<std::pair<long long, int>> t{{2, 1}, {4, 1}, {5, 1}};
    auto rep = check_index_sum_estimate(t, 2);
    EXPECT_FALSE(rep.holds);
    EXPECT_EQ(rep.first_violation, 1);
    EXPECT_FALSE(rep.weak_holds);
}
