#include <maslov/core.hpp>

#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

using namespace maslov;

namespace {

Mat random_symplectic(int n, std::uint64_t seed, double scale = 0.5)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Mat A(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) A(i, j) = g(rng);
    A = 0.5 * (A + A.transpose()).eval();
    return Mat(standard_J(n) * A).exp();
}

// determinant of a 2x2 complex block, used as a hand-written oracle
cplx det2(cplx a, cplx b, cplx c, cplx d) { return a * d - b * c; }

} // namespace

TEST(StandardJ, BlockLayout)
{
    Mat J = standard_J(1);
    Mat expect(2, 2);
    expect << 0, -1, 1, 0;
    EXPECT_EQ(J, expect);
    EXPECT_TRUE((J * J).isApprox(-Mat::Identity(2, 2)));
    Mat J2 = standard_J(2);
    EXPECT_EQ(J2.transpose(), Mat(-J2));
    EXPECT_THROW(standard_J(0), InputError);
}

TEST(SympMatrix, RejectsNonSymplectic)
{
    Mat M = Mat::Identity(2, 2);
    M(0, 0) = 2.0;
    EXPECT_THROW(SympMatrix{M}, NotSymplecticError);
    EXPECT_NO_THROW(SympMatrix{random_symplectic(3, 4)});
}

TEST(SympMatrix, RandomExponentialsStaySymplectic)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        Mat M = random_symplectic(1 + int(s % 4), s);
        double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
        EXPECT_LE(symplectic_defect(M), 1e-9 * scale * scale);
        EXPECT_NEAR(M.determinant(), 1.0, 1e-8 * std::pow(scale, M.rows()));
    }
}

TEST(Diamond, IdentityBlocks) { EXPECT_EQ(diamond(Mat::Identity(2, 2), Mat::Identity(2, 2)), Mat(Mat::Identity(4, 4))); }

TEST(Diamond, N1TimesD2Layout)
{
    Mat M = diamond(nf_N1(1, 1), nf_D(2));
    // blocks written out by hand
    Mat expect(4, 4);
    expect << 1, 0, 1, 0,
              0, 2, 0, 0,
              0, 0, 1, 0,
              0, 0, 0, 0.5;
    EXPECT_TRUE(M.isApprox(expect));
}

TEST(Diamond, AssociativeAndAdditive)
{
    Mat a = random_symplectic(1, 1), b = random_symplectic(2, 2), c = random_symplectic(1, 3);
    EXPECT_TRUE(diamond(diamond(a, b), c).isApprox(diamond(a, diamond(b, c)), 1e-13));
    Mat r = nf_R(1.1), n1 = nf_N1(1, 1);
    EXPECT_EQ(unit_spectrum(diamond(r, n1)).total_e, unit_spectrum(r).total_e + unit_spectrum(n1).total_e);
    cplx w = std::polar(1.0, 1.1);
    EXPECT_EQ(nullity_omega(diamond(r, n1), w), nullity_omega(r, w) + nullity_omega(n1, w));
    EXPECT_LE(symplectic_defect(diamond(a, b)), 1e-12);
}

TEST(Diamond, SpectrumIsUnion)
{
    Eigen::EigenSolver<Mat> es(diamond(nf_R(0.7), nf_D(2)));
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
    auto has = [&](cplx z) {
        return std::any_of(ev.begin(), ev.end(), [&](cplx e) { return std::abs(e - z) < 1e-12; });
    };
    EXPECT_TRUE(has(std::polar(1.0, 0.7)));
    EXPECT_TRUE(has(std::polar(1.0, -0.7)));
    EXPECT_TRUE(has(2.0));
    EXPECT_TRUE(has(0.5));
}

TEST(UnitSpectrum, Basics)
{
    auto id = unit_spectrum(Mat::Identity(4, 4));
    ASSERT_EQ(id.entries.size(), 1u);
    EXPECT_EQ(id.entries[0].alg_mult, 4);
    EXPECT_EQ(id.entries[0].geo_mult, 4);
    EXPECT_EQ(id.total_e, 4);

    auto n1 = unit_spectrum(nf_N1(1, 1));
    ASSERT_EQ(n1.entries.size(), 1u);
    EXPECT_EQ(n1.entries[0].alg_mult, 2);
    EXPECT_EQ(n1.entries[0].geo_mult, 1);

    EXPECT_EQ(unit_spectrum(nf_D(2)).total_e, 0);
}

TEST(UnitSpectrum, ConjugationClosedAndEven)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Mat M = diamond(nf_R(0.3 + 0.5 * s), random_symplectic(2, s, 0.2));
        auto us = unit_spectrum(M);
        EXPECT_EQ(us.total_e % 2, 0);
        EXPECT_LE(us.total_e, int(M.rows()));
        for (const auto& e : us.entries) {
            EXPECT_LE(e.geo_mult, e.alg_mult);
            bool partner = std::any_of(us.entries.begin(), us.entries.end(),
                                       [&](const UnitEigen& f) { return std::abs(f.omega - std::conj(e.omega)) < 1e-6; });
            EXPECT_TRUE(partner);
        }
    }
}

TEST(UnitSpectrum, ReciprocalPairing)
{
    Mat M = random_symplectic(3, 11, 0.8);
    Eigen::EigenSolver<Mat> es(M);
    auto ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        cplx inv = 1.0 / ev(i);
        double best = 1e9;
        for (int j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev(j) - inv));
        EXPECT_LT(best, 1e-7);
    }
}

TEST(Nullity, Examples)
{
    EXPECT_EQ(nullity_omega(Mat::Identity(2, 2), 1.0), 2);
    EXPECT_EQ(nullity_omega(nf_N1(-1, 1), -1.0), 1);
    EXPECT_EQ(nullity_omega(nf_R(1.0), std::polar(1.0, 1.0)), 1);
    EXPECT_EQ(nullity_omega(nf_R(1.0), 1.0), 0);
}

TEST(DOmega, HandEvaluations)
{
    // (I_2, -1): (-1)^0 (-1)^1 det(2 I) = -4
    EXPECT_NEAR(D_omega(Mat::Identity(2, 2), -1.0), -4.0, 1e-14);
    EXPECT_NEAR(D_omega(nf_N1(1, 1), 1.0), 0.0, 1e-14);
    // R(t) at w: 2x2 determinant by hand
    double t = 0.9;
    cplx w = std::polar(1.0, 0.3);
    cplx det = det2(std::cos(t) - w, -std::sin(t), std::sin(t), std::cos(t) - w);
    EXPECT_NEAR(D_omega(nf_R(t), w), (std::conj(w) * det).real(), 1e-13);
    EXPECT_GT(std::abs(D_omega(nf_R(t), w)), 1e-3);
}

TEST(DOmega, ZeroIffNullity)
{
    for (double t : {0.4, 1.7, 2.9}) {
        Mat M = diamond(nf_R(t), nf_D(-2));
        cplx on = std::polar(1.0, t), off = std::polar(1.0, t + 0.2);
        EXPECT_NEAR(D_omega(M, on), 0.0, 1e-12);
        EXPECT_GE(nullity_omega(M, on), 1);
        EXPECT_GT(std::abs(D_omega(M, off)), 1e-6);
        EXPECT_EQ(nullity_omega(M, off), 0);
    }
}

TEST(NormalForms, Triviality)
{
    EXPECT_TRUE(n2_trivial(1.0, 1.0, -1.0));
    EXPECT_FALSE(n2_trivial(1.0, -1.0, 1.0));
    EXPECT_FALSE(n2_trivial(4.0, 1.0, -1.0));
    for (double t : {0.5, 2.0, 4.0, 5.5})
        EXPECT_LE(symplectic_defect(nf_N2(t, 0.8, -0.4)), 1e-12);
    EXPECT_THROW(BasicNormalForm::N1(1, 2).validate(), InputError);
    EXPECT_THROW(BasicNormalForm::R(pi).validate(), InputError);
    EXPECT_THROW(BasicNormalForm::N2(1.0, 0.5, 0.5).validate(), InputError);
}
