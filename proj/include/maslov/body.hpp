#pragma once
// Convex bodies given by a positively 2-homogeneous gauge F with F = 1 on
// the boundary.

#include "core.hpp"

#include <random>

namespace maslov {

enum class BodyKind { Ellipsoid, QuarticPerturbed, Custom };

/// Strictly convex body {F <= 1}.  Oracles return F, its gradient and its
/// Hessian; F(l z) = l^2 F(z) for l > 0.
struct ConvexBody {
    BodyKind kind = BodyKind::Ellipsoid;
    int n = 1;
    std::vector<double> r;  // ellipsoid radii (also the base of the quartic body)
    double eps = 0.0;       // quartic weight
    std::function<double(const Vec&)> F;
    std::function<Vec(const Vec&)> dF;
    std::function<Mat(const Vec&)> d2F;
    std::vector<std::string> warnings;

    /// Unit normal field scaled by N . y = 1 on the boundary, extended as
    /// F'/(2F), which is homogeneous of degree -1.
    Vec normal(const Vec& y) const { return dF(y) / (2.0 * F(y)); }

    Mat normal_jacobian(const Vec& y) const
    {
        double f = F(y);
        Vec g = dF(y);
        return d2F(y) / (2.0 * f) - g * g.transpose() / (2.0 * f * f);
    }

    /// Radial projection onto the boundary.
    Vec project(const Vec& z) const { return z / std::sqrt(F(z)); }

    /// Diameter of the ellipsoid with the same radii, which contains the
    /// quartic-perturbed body.
    double diameter_bound() const
    {
        double m = 0;
        for (double ri : r) m = std::max(m, ri);
        return 2.0 * std::sqrt(2.0) * m;
    }
};

namespace detail {

/// Warns when r_i / r_j is within 1e-9 of p / q with q <= 50.
inline std::vector<std::string> rationality_warnings(const std::vector<double>& r)
{
    std::vector<std::string> w;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = i + 1; j < r.size(); ++j) {
            double x = r[i] / r[j];
            if (std::abs(r[i] - r[j]) <= 1e-12 * std::max(r[i], r[j])) {
                w.push_back("radii " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                            " coincide: the ellipsoid is resonant");
                continue;
            }
            for (int q = 1; q <= 50; ++q) {
                double p = std::round(x * q);
                if (p > 0 && std::abs(x - p / q) <= 1e-9) {
                    w.push_back("radius ratio r" + std::to_string(i + 1) + "/r" + std::to_string(j + 1) +
                                " is within 1e-9 of " + std::to_string(int(p)) + "/" + std::to_string(q));
                    break;
                }
            }
        }
    return w;
}

inline void check_radii(const std::vector<double>& r)
{
    if (r.empty()) throw InputError("at least one radius is required");
    for (double x : r)
        if (!(x > 0) || !std::isfinite(x)) throw InputError("radii must be positive");
}

} // namespace detail

/// {1/2 sum (x_i^2 + y_i^2) / r_i^2 = 1}.
inline ConvexBody make_ellipsoid(const std::vector<double>& r)
{
    detail::check_radii(r);
    ConvexBody b;
    b.kind = BodyKind::Ellipsoid;
    b.n = static_cast<int>(r.size());
    b.r = r;
    const int n = b.n;
    Vec q(2 * n);
    for (int i = 0; i < n; ++i) q(i) = q(n + i) = 1.0 / (2.0 * r[i] * r[i]);
    b.F = [q](const Vec& z) { return (q.array() * z.array().square()).sum(); };
    b.dF = [q](const Vec& z) { return Vec(2.0 * q.array() * z.array()); };
    b.d2F = [q](const Vec&) { return Mat(Mat(2.0 * q.asDiagonal())); };
    b.warnings = detail::rationality_warnings(r);
    return b;
}

/// Gauge F solving F^2 = H2 F + eps Q4, i.e. F = (H2 + sqrt(H2^2 + 4 eps Q4)) / 2,
/// with H2 the ellipsoid quadratic and Q4 = sum (x_i^4 + y_i^4) / (4 r_i^4).
inline ConvexBody make_quartic_perturbed(const std::vector<double>& r, double eps)
{
    detail::check_radii(r);
    if (!(eps >= 0) || !std::isfinite(eps)) throw InputError("eps must be non-negative");
    ConvexBody b;
    b.kind = BodyKind::QuarticPerturbed;
    b.n = static_cast<int>(r.size());
    b.r = r;
    b.eps = eps;
    const int n = b.n;
    Vec q(2 * n), c(2 * n);
    for (int i = 0; i < n; ++i) {
        q(i) = q(n + i) = 1.0 / (2.0 * r[i] * r[i]);
        c(i) = c(n + i) = 1.0 / (4.0 * std::pow(r[i], 4));
    }
    struct Parts {
        double a, b, s;
        Vec da, db;
    };
    auto parts = [q, c, eps](const Vec& z) {
        Parts p;
        p.a = (q.array() * z.array().square()).sum();
        p.b = (c.array() * z.array().pow(4)).sum();
        p.s = std::sqrt(p.a * p.a + 4.0 * eps * p.b);
        p.da = 2.0 * q.array() * z.array();
        p.db = 4.0 * c.array() * z.array().cube();
        return p;
    };
    b.F = [parts](const Vec& z) {
        auto p = parts(z);
        return 0.5 * (p.a + p.s);
    };
    b.dF = [parts, eps](const Vec& z) {
        auto p = parts(z);
        return Vec(0.5 * (p.da + (p.a * p.da + 2.0 * eps * p.db) / p.s));
    };
    b.d2F = [parts, q, c, eps](const Vec& z) {
        auto p = parts(z);
        Mat d2a = Mat(2.0 * q.asDiagonal());
        Mat d2b = Mat((12.0 * c.array() * z.array().square()).matrix().asDiagonal());
        Vec g = p.a * p.da + 2.0 * eps * p.db;
        Mat h = p.da * p.da.transpose() + p.a * d2a + 2.0 * eps * d2b;
        return Mat(0.5 * (d2a + h / p.s - g * g.transpose() / (p.s * p.s * p.s)));
    };
    b.warnings = detail::rationality_warnings(r);
    return b;
}

/// Minimum Hessian eigenvalue of F over random boundary points (spot check
/// of strict convexity).
inline double convexity_spot_check(const ConvexBody& b, int samples = 64, std::uint64_t seed = 7)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        Vec z(2 * b.n);
        for (int i = 0; i < 2 * b.n; ++i) z(i) = g(rng);
        z = b.project(z);
        Eigen::SelfAdjointEigenSolver<Mat> es(b.d2F(z));
        worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    return worst;
}

} // namespace maslov
