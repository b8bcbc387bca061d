#include <maslov/corpus.hpp>
#include <maslov/index.hpp>
#include <maslov/normal_form.hpp>

#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

using namespace maslov;

namespace {

Mat random_symplectic(int n, std::uint64_t seed, double scale)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Mat A(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) A(i, j) = g(rng);
    A = 0.5 * (A + A.transpose()).eval();
    return Mat(standard_J(n) * A).exp();
}

void expect_same(const NormalFormDecomposition& a, const NormalFormDecomposition& b)
{
    EXPECT_EQ(a.p_minus, b.p_minus);
    EXPECT_EQ(a.p_zero, b.p_zero);
    EXPECT_EQ(a.p_plus, b.p_plus);
    EXPECT_EQ(a.q_minus, b.q_minus);
    EXPECT_EQ(a.q_zero, b.q_zero);
    EXPECT_EQ(a.q_plus, b.q_plus);
    EXPECT_EQ(a.hyperbolic_dim, b.hyperbolic_dim);
    EXPECT_EQ(a.negative_real_pairs, b.negative_real_pairs);
    ASSERT_EQ(a.thetas.size(), b.thetas.size());
    ASSERT_EQ(a.alphas.size(), b.alphas.size());
    ASSERT_EQ(a.betas.size(), b.betas.size());
    for (size_t i = 0; i < a.thetas.size(); ++i) EXPECT_NEAR(a.thetas[i], b.thetas[i], 1e-6);
    for (size_t i = 0; i < a.alphas.size(); ++i) EXPECT_NEAR(a.alphas[i], b.alphas[i], 1e-6);
    for (size_t i = 0; i < a.betas.size(); ++i) EXPECT_NEAR(a.betas[i], b.betas[i], 1e-6);
}

int rotation_index(double theta, int m)
{
    double a = m * theta / (2 * M_PI);
    double r = std::round(a);
    long long E = std::abs(a - r) < 1e-12 ? (long long)r : (long long)std::ceil(a);
    return int(2 * E - 1);
}

} // namespace

TEST(FloorCeil, Examples)
{
    auto a = floor_ceil_phi(2.5);
    EXPECT_EQ(a.floor, 2);
    EXPECT_EQ(a.ceil, 3);
    EXPECT_EQ(a.phi, 1);
    auto b = floor_ceil_phi(3.0);
    EXPECT_EQ(b.floor, 3);
    EXPECT_EQ(b.ceil, 3);
    EXPECT_EQ(b.phi, 0);
    auto c = floor_ceil_phi(-0.5);
    EXPECT_EQ(c.floor, -1);
    EXPECT_EQ(c.ceil, 0);
    EXPECT_EQ(floor_ceil_phi(3.0 + 1e-14).phi, 0);
}

TEST(Decompose, SingleBlocks)
{
    auto d = decompose(Mat::Identity(2, 2));
    EXPECT_EQ(d.p_zero, 1);
    EXPECT_EQ(d.e(), 2);

    EXPECT_EQ(decompose(nf_N1(1, 1)).p_minus, 1);
    EXPECT_EQ(decompose(nf_N1(1, -1)).p_plus, 1);
    EXPECT_EQ(decompose(nf_N1(-1, 1)).q_minus, 1);
    EXPECT_EQ(decompose(nf_N1(-1, -1)).q_plus, 1);
    EXPECT_EQ(decompose(Mat(-Mat::Identity(2, 2))).q_zero, 1);

    auto r = decompose(nf_R(1.0));
    ASSERT_EQ(r.r, 1);
    EXPECT_NEAR(r.thetas[0], 1.0, 1e-9);
    auto r2 = decompose(nf_R(4.0));
    ASSERT_EQ(r2.r, 1);
    EXPECT_NEAR(r2.thetas[0], 4.0, 1e-9);

    auto h = decompose(nf_D(2));
    EXPECT_EQ(h.hyperbolic_dim, 2);
    EXPECT_EQ(h.e(), 0);
    EXPECT_EQ(h.negative_real_pairs, 0);
}

TEST(Decompose, HyperbolicProducts)
{
    auto d = decompose(diamond(nf_D(2), nf_D(-2)));
    EXPECT_EQ(d.hyperbolic_dim, 4);
    EXPECT_EQ(d.negative_real_pairs, 1);
    EXPECT_EQ(d.index_parity(), 1);
    EXPECT_EQ(decompose(diamond(nf_D(-2), nf_D(-2))).negative_real_pairs, 2);
}

TEST(Decompose, N2Triviality)
{
    // (b2 - b3) sin(theta) < 0 is non-trivial
    auto nt = decompose(nf_N2(1.0, -1.0, 1.0));
    EXPECT_EQ(nt.r_star, 1);
    EXPECT_EQ(nt.r_zero, 0);
    EXPECT_NEAR(nt.alphas[0], 1.0, 1e-6);
    auto tr = decompose(nf_N2(1.0, 1.0, -1.0));
    EXPECT_EQ(tr.r_zero, 1);
    EXPECT_EQ(tr.r_star, 0);
    EXPECT_EQ(tr.e(), 4);
}

TEST(Decompose, ConjugationInvariance)
{
    std::vector<Mat> ms{diamond(nf_R(1.1), nf_N1(1, 1)), diamond(nf_N1(-1, -1), nf_D(2)),
                        diamond(nf_R(5.0), Mat(Mat::Identity(2, 2))), nf_N2(2.0, -0.5, 0.5),
                        diamond(nf_R(0.4), nf_R(2.5))};
    for (size_t k = 0; k < ms.size(); ++k) {
        auto base = decompose(ms[k]);
        int n = half_dim(ms[k]);
        for (std::uint64_t s = 0; s < 4; ++s) {
            Mat P = random_symplectic(n, 100 * k + s, 0.3);
            Mat C = P.inverse() * ms[k] * P;
            SCOPED_TRACE("matrix " + std::to_string(k) + " seed " + std::to_string(s));
            expect_same(base, decompose(C));
        }
    }
}

TEST(Decompose, RejectsNonSymplectic)
{
    Mat M = Mat::Identity(2, 2);
    M(0, 1) = 1;
    M(1, 1) = 2;
    EXPECT_THROW(decompose(M), NotSymplecticError);
}

TEST(Iteration, RotationMatchesHandCount)
{
    for (double theta : {2 * M_PI / 3, 1.0, 4.5}) {
        auto d = decompose(nf_R(theta));
        int i1 = rotation_index(theta, 1);
        for (int m = 1; m <= 9; ++m) {
            EXPECT_EQ(iteration_index(d, i1, m), rotation_index(theta, m)) << theta << " " << m;
            double a = m * theta / (2 * M_PI);
            int nu = std::abs(a - std::round(a)) < 1e-12 ? 2 : 0;
            EXPECT_EQ(iteration_nullity(d, 0, m), nu);
        }
        EXPECT_NEAR(mean_index(d, i1), theta / M_PI, 1e-12);
    }
    auto d = decompose(nf_R(2 * M_PI / 3));
    EXPECT_EQ(iteration_index(d, 1, 4), 3);
}

TEST(Iteration, MinusIdentity)
{
    // R(t) on [0, pi] ends at -I; its square is the full turn
    auto d = decompose(Mat(-Mat::Identity(2, 2)));
    EXPECT_EQ(iteration_index(d, 1, 1), 1);
    EXPECT_EQ(iteration_index(d, 1, 2), 1);
    EXPECT_EQ(iteration_nullity(d, 0, 2), 2);
    EXPECT_EQ(iteration_index(d, 1, 3), 3);
}

TEST(Iteration, ParityGuard)
{
    auto d = decompose(nf_N1(1, 1));
    EXPECT_THROW(iteration_index(d, 2, 3), InputError);
    EXPECT_EQ(iteration_index(d, 1, 3), 5);
    EXPECT_EQ(iteration_nullity(d, 1, 3), 1);
    EXPECT_THROW(iteration_index(d, 1, 0), InputError);
}

TEST(Iteration, AgreesWithEngineOnProducts)
{
    std::vector<std::vector<BlockPath>> cases{
        {{BasicNormalForm::R(1.3), 1}, {BasicNormalForm::N1(1, -1), 0}},
        {{BasicNormalForm::N2(2.0, -0.5, 0.5), 0}},
        {{BasicNormalForm::N2(2.0, 0.5, -0.5), 1}},
        {{BasicNormalForm::D(-2), 0}, {BasicNormalForm::N1(-1, 1), 1}},
    };
    for (size_t k = 0; k < cases.size(); ++k) {
        auto p = path_to_blocks(cases[k]);
        auto d = decompose(p.end_value());
        auto first = index_nullity(p, 1.0);
        for (int m = 1; m <= 6; ++m) {
            auto r = index_nullity(iterate_path(p, m), 1.0);
            EXPECT_EQ(iteration_index(d, first.index, m), r.index) << k << " m=" << m;
            EXPECT_EQ(iteration_nullity(d, first.nullity, m), r.nullity) << k << " m=" << m;
        }
    }
}

TEST(Splitting, TableValues)
{
    auto s = splitting_numbers(nf_N1(1, 1), 1.0);
    EXPECT_EQ(s.s_plus, 1);
    EXPECT_EQ(s.s_minus, 1);
    s = splitting_numbers(nf_N1(1, -1), 1.0);
    EXPECT_EQ(s.s_plus, 0);
    s = splitting_numbers(Mat(Mat::Identity(2, 2)), 1.0);
    EXPECT_EQ(s.s_plus, 1);
    s = splitting_numbers(nf_R(1.0), std::polar(1.0, 1.0));
    EXPECT_EQ(s.s_plus, 0);
    EXPECT_EQ(s.s_minus, 1);
    s = splitting_numbers(nf_R(1.0), std::polar(1.0, -1.0));
    EXPECT_EQ(s.s_plus, 1);
    EXPECT_EQ(s.s_minus, 0);
    s = splitting_numbers(nf_R(1.0), std::polar(1.0, 2.0));
    EXPECT_EQ(s.s_plus + s.s_minus, 0);
    EXPECT_THROW(splitting_numbers(nf_R(1.0), cplx(2.0, 0.0)), InputError);
}

TEST(Splitting, BoundsAndAdditivity)
{
    std::vector<Mat> blocks{nf_N1(1, 1), nf_N1(-1, -1), nf_R(2.0), nf_N2(2.0, -0.5, 0.5), nf_D(2)};
    std::vector<cplx> ws{1.0, -1.0, std::polar(1.0, 2.0), std::polar(1.0, -2.0)};
    for (cplx w : ws) {
        int sp = 0, sm = 0;
        for (const auto& b : blocks) {
            auto s = splitting_numbers(b, w);
            int nu = nullity_omega(b, w);
            EXPECT_GE(s.s_plus, 0);
            EXPECT_GE(s.s_minus, 0);
            EXPECT_LE(s.s_plus, nu);
            EXPECT_LE(s.s_minus, nu);
            sp += s.s_plus;
            sm += s.s_minus;
        }
        auto all = splitting_numbers(diamond_all(blocks), w);
        EXPECT_EQ(all.s_plus, sp);
        EXPECT_EQ(all.s_minus, sm);
    }
}

TEST(Splitting, TableAgreesWithEngine)
{
    std::vector<std::pair<BlockPath, cplx>> cases{
        {{BasicNormalForm::N1(1, 1), 0}, 1.0},         {{BasicNormalForm::N1(1, -1), 1}, 1.0},
        {{BasicNormalForm::N1(-1, 1), 0}, -1.0},       {{BasicNormalForm::N1(-1, -1), 0}, -1.0},
        {{BasicNormalForm::R(2.0), 0}, std::polar(1.0, 2.0)},
        {{BasicNormalForm::R(2.0), 1}, std::polar(1.0, -2.0)},
        {{BasicNormalForm::N2(2.0, -0.5, 0.5), 0}, std::polar(1.0, 2.0)},
        {{BasicNormalForm::N2(2.0, 0.5, -0.5), 0}, std::polar(1.0, 2.0)},
    };
    for (size_t k = 0; k < cases.size(); ++k) {
        auto p = path_to_blocks({cases[k].first});
        auto table = splitting_numbers(p.end_value(), cases[k].second);
        for (double eps : {1e-3, 5e-4}) {
            auto [sp, sm] = splitting_numbers_numeric(p, cases[k].second, eps);
            EXPECT_EQ(sp, table.s_plus) << k << " eps " << eps;
            EXPECT_EQ(sm, table.s_minus) << k << " eps " << eps;
        }
    }
}

TEST(Splitting, ProvenanceTrace)
{
    std::vector<SplitContribution> trace;
    splitting_numbers(diamond(nf_N1(1, 1), nf_R(1.0)), 1.0, &trace);
    ASSERT_EQ(trace.size(), 1u);
    EXPECT_EQ(trace[0].source, SplitSource::ClosedForm);
    EXPECT_STREQ(to_string(SplitSource::FrozenNumeric), "frozen-numeric");
}

TEST(Splitting, IdentityCheck)
{
    EXPECT_EQ(splitting_identity_check(nf_N1(1, 1)), 1);
    EXPECT_EQ(splitting_identity_check(diamond(nf_N1(1, 1), nf_N1(1, 1))), 2);
    EXPECT_EQ(splitting_identity_check(diamond_all(std::vector<Mat>{nf_N1(1, 1), nf_N1(1, -1), nf_N1(1, -1)})), -1);
    EXPECT_EQ(splitting_identity_check(diamond(nf_N1(1, 1), nf_R(0.5))), 1);
    EXPECT_THROW(splitting_identity_check(nf_R(0.5)), InputError);
}
