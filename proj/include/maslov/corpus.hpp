#pragma once
// Explicit paths ending at diamond products of basic normal forms, and a
// seeded generator of random products.

#include "path.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace maslov {

/// A basic normal form reached by a two-segment exponential path: the first
/// segment winds (to +-I), the second moves to the block.
struct BlockPath {
    BasicNormalForm block;
    int winding = 0;
};

namespace detail {

inline Mat rotation_generator(int dim_half, double phi)
{
    return phi * Mat::Identity(2 * dim_half, 2 * dim_half);
}

/// Generator of t -> diag(R(t phi), R(t phi)) on the 4-dimensional N2 space.
inline Mat double_rotation_generator(double phi)
{
    Mat A = Mat::Zero(4, 4);
    Eigen::Matrix2d J2;
    J2 << 0, -1, 1, 0;
    A.block(0, 2, 2, 2) = phi * J2;
    A.block(2, 0, 2, 2) = -phi * J2;
    return A;
}

} // namespace detail

inline std::pair<Mat, Mat> block_generators(const BlockPath& bp)
{
    using namespace detail;
    const auto& b = bp.block;
    b.validate();
    const double k = bp.winding;
    switch (b.kind) {
    case BlockKind::R: return {rotation_generator(1, two_pi * k), rotation_generator(1, b.theta)};
    case BlockKind::D: {
        double first = b.lambda > 0 ? two_pi * k : pi * (2 * k + 1);
        Mat H(2, 2);
        H << 0, -std::log(2.0), -std::log(2.0), 0;
        return {rotation_generator(1, first), H};
    }
    case BlockKind::N1: {
        double first = b.lambda > 0 ? two_pi * k : pi * (2 * k + 1);
        Mat A = Mat::Zero(2, 2);
        A(1, 1) = b.lambda > 0 ? -b.b : b.b;
        return {rotation_generator(1, first), A};
    }
    case BlockKind::N2: {
        Mat A1 = double_rotation_generator(two_pi * k + b.theta);
        Eigen::Matrix2d R;
        R << std::cos(b.theta), -std::sin(b.theta), std::sin(b.theta), std::cos(b.theta);
        Eigen::Matrix2d C = n2_coupling(b.theta, b.b2, b.b3) * R.transpose();
        C = 0.5 * (C + C.transpose()).eval();
        Mat A2 = Mat::Zero(4, 4);
        A2.block(2, 2, 2, 2) = -C;
        return {A1, A2};
    }
    }
    return {};
}

inline int total_half_dim(const std::vector<BlockPath>& blocks)
{
    int n = 0;
    for (const auto& b : blocks) n += b.block.n();
    return n;
}

/// Path on [0, 2] whose endpoint is the diamond product of the blocks.
inline SymplecticPath path_to_blocks(const std::vector<BlockPath>& blocks)
{
    std::vector<Mat> g1, g2;
    for (const auto& b : blocks) {
        auto [a1, a2] = block_generators(b);
        g1.push_back(a1);
        g2.push_back(a2);
    }
    SymplecticPath p(total_half_dim(blocks));
    p.add_exp(diamond_all(g1), 1.0);
    p.add_exp(diamond_all(g2), 1.0);
    return p;
}

inline Mat product_matrix(const std::vector<BlockPath>& blocks)
{
    std::vector<BasicNormalForm> b;
    for (const auto& x : blocks) b.push_back(x.block);
    return diamond_of(b);
}

struct CorpusOptions {
    int n_max = 4;
    double rational_fraction = 0.15; // share of angles of the form 2 pi p / q
    double min_gap = 1e-3;            // distance of m theta / 2 pi from integers
    int resonance_m = 64;
};

namespace detail {

inline bool angle_ok(double theta, const std::vector<double>& used, const CorpusOptions& o, bool rational)
{
    if (std::abs(theta - pi) < 0.05 || theta < 0.05 || theta > two_pi - 0.05) return false;
    for (double u : used)
        if (std::abs(theta - u) < 0.05 || std::abs(theta - (two_pi - u)) < 0.05) return false;
    if (rational) return true;
    for (int m = 1; m <= o.resonance_m; ++m) {
        double x = m * theta / two_pi;
        if (std::abs(x - std::round(x)) < o.min_gap) return false;
    }
    return true;
}

inline double draw_angle(std::mt19937_64& rng, std::vector<double>& used, const CorpusOptions& o)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int tries = 0; tries < 10000; ++tries) {
        bool rational = U(rng) < o.rational_fraction;
        double theta;
        if (rational) {
            int q = 3 + static_cast<int>(U(rng) * 10); // 3..12
            int p = 1 + static_cast<int>(U(rng) * (q - 1));
            if (std::gcd(p, q) != 1) continue;
            theta = two_pi * p / q;
        } else {
            theta = two_pi * U(rng);
        }
        if (angle_ok(theta, used, o, rational)) {
            used.push_back(theta);
            return theta;
        }
    }
    throw Error("could not draw a separated angle");
}

} // namespace detail

/// Random diamond product of basic normal forms with total half dimension
/// in 1..n_max, together with random windings.
inline std::vector<BlockPath> random_blocks(std::mt19937_64& rng, const CorpusOptions& o = {})
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int n = 1 + static_cast<int>(U(rng) * o.n_max);
    std::vector<BlockPath> out;
    std::vector<double> used;
    int left = n;
    auto pick = [&](double a, double b) { return a + static_cast<int>(U(rng) * (b - a + 1)); };
    auto sign = [&]() { return U(rng) < 0.5 ? -1.0 : 1.0; };
    while (left > 0) {
        BlockPath bp;
        bp.winding = static_cast<int>(pick(-1, 1));
        double r = U(rng);
        if (left >= 2 && r < 0.12) {
            double t = detail::draw_angle(rng, used, o);
            double b2 = sign(), b3 = -b2 * (0.5 + U(rng));
            if (U(rng) < 0.5) std::swap(b2, b3);
            bp.block = BasicNormalForm::N2(t, b2, b3);
            left -= 2;
        } else if (r < 0.45) {
            bp.block = BasicNormalForm::R(detail::draw_angle(rng, used, o));
            left -= 1;
        } else if (r < 0.75) {
            bp.block = BasicNormalForm::N1(sign(), static_cast<double>(pick(-1, 1)));
            left -= 1;
        } else {
            bp.block = BasicNormalForm::D(2.0 * sign());
            left -= 1;
        }
        out.push_back(bp);
    }
    return out;
}

} // namespace maslov
