#pragma once
// Fourier-truncated dual action
//   Phi(u) = int_0^1 ( 1/2 Ju . Mu + H*(-Ju) ) dt
// on mean-zero loops, with H = F^{alpha/2} the alpha-homogeneous
// Hamiltonian of a body gauge F.  Critical points are period-1 solutions
// z = grad H*(-Ju) of z' = J H'(z); their Hessian index and nullity are
// extracted from the truncated Hessian.

#include "characteristics.hpp"

#include <optional>

namespace maslov {

struct FenchelValue {
    double value = 0;
    Vec grad;
    Mat hess;
};

/// Legendre transform H* of H = F^{alpha/2}.  Ellipsoids use the closed
/// form (alpha - 1) alpha^{-beta} (w^T Q^{-1} w)^{beta/2}; other bodies are
/// transformed pointwise by Newton maximization of w.z - H(z).
class Fenchel {
public:
    Fenchel(const ConvexBody& b, double alpha, bool force_generic = false) : body_(&b), alpha_(alpha)
    {
        if (!(alpha > 1 && alpha < 2)) throw InputError("alpha must lie in (1, 2)");
        beta_ = alpha / (alpha - 1);
        closed_ = b.kind == BodyKind::Ellipsoid && !force_generic;
        if (closed_) {
            P_ = Vec(2 * b.n);
            for (int i = 0; i < b.n; ++i) P_(i) = P_(b.n + i) = 2.0 * b.r[i] * b.r[i];
        }
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool closed_form() const { return closed_; }

    double H(const Vec& z) const { return std::pow(body_->F(z), alpha_ / 2); }

    Vec dH(const Vec& z) const { return (alpha_ / 2) * std::pow(body_->F(z), alpha_ / 2 - 1) * body_->dF(z); }

    Mat d2H(const Vec& z) const
    {
        double f = body_->F(z);
        Vec g = body_->dF(z);
        double h = alpha_ / 2;
        return h * std::pow(f, h - 1) * body_->d2F(z) + h * (h - 1) * std::pow(f, h - 2) * g * g.transpose();
    }

    FenchelValue eval(const Vec& w) const { return closed_ ? closed_eval(w) : generic_eval(w); }

private:
    FenchelValue closed_eval(const Vec& w) const
    {
        FenchelValue r;
        const double c = (alpha_ - 1) * std::pow(alpha_, -beta_);
        Vec Pw = P_.cwiseProduct(w);
        double s = w.dot(Pw);
        if (!(s > 0)) throw Error("Fenchel transform evaluated at the origin");
        r.value = c * std::pow(s, beta_ / 2);
        r.grad = c * beta_ * std::pow(s, beta_ / 2 - 1) * Pw;
        r.hess = c * beta_ * std::pow(s, beta_ / 2 - 1) * Mat(P_.asDiagonal()) +
                 c * beta_ * (beta_ - 2) * std::pow(s, beta_ / 2 - 2) * Pw * Pw.transpose();
        return r;
    }

    FenchelValue generic_eval(const Vec& w) const
    {
        const double wn = w.norm();
        if (!(wn > 0)) throw Error("Fenchel transform evaluated at the origin");
        // best multiple of w, then Newton on w - H'(z) = 0
        Vec d = w / wn;
        double s = std::pow(w.dot(d) / (alpha_ * H(d)), 1.0 / (alpha_ - 1));
        Vec z = s * d;
        auto obj = [&](const Vec& x) { return w.dot(x) - H(x); };
        double fz = obj(z);
        for (int it = 0; it < 60; ++it) {
            Vec g = w - dH(z);
            if (g.norm() <= 1e-13 * wn) {
                FenchelValue r;
                r.value = fz;
                r.grad = z;
                r.hess = d2H(z).inverse();
                return r;
            }
            Vec step = d2H(z).llt().solve(g);
            double t = 1.0;
            for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
                Vec zn = z + t * step;
                double fn = obj(zn);
                if (fn >= fz - 1e-15 * std::abs(fz)) {
                    z = zn;
                    fz = fn;
                    break;
                }
            }
        }
        throw Error("Fenchel maximization did not converge");
    }

    const ConvexBody* body_;
    double alpha_, beta_;
    bool closed_ = false;
    Vec P_;
};

/// Coefficients are ordered (mode k = 1..K, cos then sin, component).
class DualAction {
public:
    DualAction(const ConvexBody& b, double alpha, int K, int quad_points = 0, bool force_generic = false)
        : body_(&b), fenchel_(b, alpha, force_generic), n_(b.n), K_(K)
    {
        if (K < 1) throw InputError("truncation K must be positive");
        L_ = quad_points > 0 ? quad_points : 8 * K;
        if (L_ < 4 * K + 1) throw InputError("need at least 4K + 1 quadrature points");
        C_ = Mat(L_, K_);
        S_ = Mat(L_, K_);
        for (int l = 0; l < L_; ++l)
            for (int k = 1; k <= K_; ++k) {
                double a = two_pi * k * l / L_;
                C_(l, k - 1) = std::cos(a);
                S_(l, k - 1) = std::sin(a);
            }
    }

    int dim() const { return 2 * n_ * 2 * K_; }
    int K() const { return K_; }
    int quad_points() const { return L_; }
    const Fenchel& fenchel() const { return fenchel_; }

    static int idx(int n, int k, int s, int i) { return ((k - 1) * 2 + s) * 2 * n + i; }
    int idx(int k, int s, int i) const { return idx(n_, k, s, i); }

    /// u(t_l) for every quadrature node, as columns.
    Mat loop_values(const Vec& c) const
    {
        const int N = 2 * n_;
        Mat U = Mat::Zero(N, L_);
        for (int k = 1; k <= K_; ++k)
            for (int i = 0; i < N; ++i) {
                double a = c(idx(k, 0, i)), b = c(idx(k, 1, i));
                if (a != 0) U.row(i) += a * C_.col(k - 1).transpose();
                if (b != 0) U.row(i) += b * S_.col(k - 1).transpose();
            }
        return U;
    }

    /// Zero-mean primitive Mu at the quadrature nodes.
    Mat primitive_values(const Vec& c) const
    {
        const int N = 2 * n_;
        Mat Z = Mat::Zero(N, L_);
        for (int k = 1; k <= K_; ++k)
            for (int i = 0; i < N; ++i) {
                double a = c(idx(k, 0, i)), b = c(idx(k, 1, i));
                Z.row(i) += (a * S_.col(k - 1).transpose() - b * C_.col(k - 1).transpose()) / (two_pi * k);
            }
        return Z;
    }

    double quadratic(const Vec& c) const
    {
        const Mat J = standard_J(n_);
        double q = 0;
        for (int k = 1; k <= K_; ++k)
            q += c.segment(idx(k, 0, 0), 2 * n_).dot(J * c.segment(idx(k, 1, 0), 2 * n_)) / (4 * pi * k);
        return q;
    }

    Mat quadratic_matrix() const
    {
        const int N = 2 * n_;
        const Mat J = standard_J(n_);
        Mat A = Mat::Zero(dim(), dim());
        for (int k = 1; k <= K_; ++k) {
            A.block(idx(k, 0, 0), idx(k, 1, 0), N, N) = J / (4 * pi * k);
            A.block(idx(k, 1, 0), idx(k, 0, 0), N, N) = J.transpose() / (4 * pi * k);
        }
        return A;
    }

    double value(const Vec& c) const
    {
        const Mat J = standard_J(n_);
        Mat U = loop_values(c);
        double h = 0;
        for (int l = 0; l < L_; ++l) h += fenchel_.eval(-J * U.col(l)).value;
        return quadratic(c) + h / L_;
    }

    struct Derivatives {
        double value = 0;
        Vec grad;
        Mat hess;
    };

    Derivatives derivatives(const Vec& c, bool with_hessian = true) const
    {
        const int N = 2 * n_;
        const Mat J = standard_J(n_);
        Derivatives d;
        Mat U = loop_values(c);
        Mat G(N, L_);
        std::vector<Mat> W;
        if (with_hessian) W.resize(L_);
        double h = 0;
        for (int l = 0; l < L_; ++l) {
            auto fv = fenchel_.eval(-J * U.col(l));
            h += fv.value;
            G.col(l) = J * fv.grad;
            if (with_hessian) W[l] = J.transpose() * fv.hess * J;
        }
        d.value = quadratic(c) + h / L_;
        Mat A = quadratic_matrix();
        d.grad = A * c;
        for (int k = 1; k <= K_; ++k)
            for (int i = 0; i < N; ++i) {
                d.grad(idx(k, 0, i)) += G.row(i).dot(C_.col(k - 1)) / L_;
                d.grad(idx(k, 1, i)) += G.row(i).dot(S_.col(k - 1)) / L_;
            }
        if (!with_hessian) return d;

        // (1/L) sum_l phi_p phi_q W_l from the discrete cosine and sine
        // moments of each entry of W, frequencies 0..2K
        d.hess = A;
        const int F = 2 * K_;
        Mat wc(F + 1, N * N), ws(F + 1, N * N);
        for (int f = 0; f <= F; ++f) {
            Vec cs(L_), sn(L_);
            for (int l = 0; l < L_; ++l) {
                double a = two_pi * double(f) * l / L_;
                cs(l) = std::cos(a);
                sn(l) = std::sin(a);
            }
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    double sc = 0, ss = 0;
                    for (int l = 0; l < L_; ++l) {
                        sc += W[l](i, j) * cs(l);
                        ss += W[l](i, j) * sn(l);
                    }
                    wc(f, i * N + j) = sc / L_;
                    ws(f, i * N + j) = ss / L_;
                }
        }
        auto mc = [&](int f, int e) { return wc(std::abs(f), e); };
        auto ms = [&](int f, int e) { return f >= 0 ? ws(f, e) : -ws(-f, e); };
        for (int p = 1; p <= K_; ++p)
            for (int q = 1; q <= K_; ++q)
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        int e = i * N + j;
                        d.hess(idx(p, 0, i), idx(q, 0, j)) += 0.5 * (mc(p - q, e) + mc(p + q, e));
                        d.hess(idx(p, 1, i), idx(q, 1, j)) += 0.5 * (mc(p - q, e) - mc(p + q, e));
                        d.hess(idx(p, 0, i), idx(q, 1, j)) += 0.5 * (ms(q + p, e) + ms(q - p, e));
                        d.hess(idx(p, 1, i), idx(q, 0, j)) += 0.5 * (ms(p + q, e) + ms(p - q, e));
                    }
        d.hess = 0.5 * (d.hess + d.hess.transpose()).eval();
        return d;
    }

    /// Coefficients of the time derivative of u, the S^1 direction.
    Vec time_derivative(const Vec& c) const
    {
        Vec v = Vec::Zero(dim());
        for (int k = 1; k <= K_; ++k)
            for (int i = 0; i < 2 * n_; ++i) {
                v(idx(k, 0, i)) = two_pi * k * c(idx(k, 1, i));
                v(idx(k, 1, i)) = -two_pi * k * c(idx(k, 0, i));
            }
        return v;
    }

    /// Solution z = grad H*(-Ju) of z' = J H'(z) at the quadrature nodes.
    Mat solution_values(const Vec& c) const
    {
        const Mat J = standard_J(n_);
        Mat U = loop_values(c);
        Mat Z(2 * n_, L_);
        for (int l = 0; l < L_; ++l) Z.col(l) = fenchel_.eval(-J * U.col(l)).grad;
        return Z;
    }

    /// Coefficients of samples u(l / L') of a loop given on its own grid.
    Vec coefficients_from_samples(const Mat& U) const
    {
        const int Ls = static_cast<int>(U.cols());
        Vec c = Vec::Zero(dim());
        for (int k = 1; k <= K_; ++k)
            for (int l = 0; l < Ls; ++l) {
                double a = two_pi * k * l / Ls;
                for (int i = 0; i < 2 * n_; ++i) {
                    c(idx(k, 0, i)) += 2.0 * U(i, l) * std::cos(a) / Ls;
                    c(idx(k, 1, i)) += 2.0 * U(i, l) * std::sin(a) / Ls;
                }
            }
        return c;
    }

private:
    const ConvexBody* body_;
    Fenchel fenchel_;
    int n_, K_, L_;
    Mat C_, S_;
};

struct DualCriticalPoint {
    Vec fourier_coeffs;
    int K = 0;
    double value = 0;
    double grad_norm = 0;
    int hessian_index = 0;
    int hessian_nullity = 0;
    bool s1_in_kernel = false;     // u' is a null direction of the truncated Hessian
    double hess_tol = 0;
    double smallest_nonzero = 0;   // smallest |eigenvalue| above hess_tol
    bool converged = false;
    std::string seed_label;
    std::optional<std::pair<int, int>> matched_orbit; // (orbit position, iterate m)
    double match_distance = 0;

    /// Nullity with the time-translation direction removed.
    int nullity_without_s1() const { return hessian_nullity - (s1_in_kernel ? 1 : 0); }
};

struct DualSeed {
    Vec coeffs;
    std::string label;
};

struct DualOptions {
    double alpha = 1.5;
    int K = 64;
    int quad_points = 0;            // 0: 8K
    double grad_tol = 1e-10;        // relative to the norm of the coefficients
    int newton_max_iter = 30;
    int descent_iter = 300;
    double hess_rel_tol = 1e-6;
    bool force_generic_fenchel = false;
};

/// Point on the ray through c where the restricted action s^2 A + s^beta B
/// is critical; requires a negative quadratic part.
inline Vec optimal_scaling(const DualAction& da, const Vec& c)
{
    double A = da.quadratic(c);
    double B = da.value(c) - A;
    double beta = da.fenchel().beta();
    if (!(A < 0) || !(B > 0)) throw Error("seed has no negative quadratic part");
    double s = std::pow(-2.0 * A / (beta * B), 1.0 / (beta - 2.0));
    return s * c;
}

/// Counter-clockwise circle of mode m in the j-th coordinate plane.
inline DualSeed circle_seed(const DualAction& da, int n, int j, int m)
{
    DualSeed s;
    s.coeffs = Vec::Zero(da.dim());
    s.coeffs(DualAction::idx(n, m, 0, n + j)) = 1.0;
    s.coeffs(DualAction::idx(n, m, 1, j)) = -1.0;
    s.label = "circle plane " + std::to_string(j + 1) + " mode " + std::to_string(m);
    return s;
}

/// Loop u = z' of the period-1 solution z(t) = lam y(m tau t) that runs m
/// times around the orbit, lam = (m tau / alpha)^{1/(alpha-2)}.
inline DualSeed orbit_seed(const DualAction& da, const ConvexBody& b, const ClosedOrbit& o, int m, double alpha,
                           const FlowOptions& fo = {})
{
    const int Ls = da.quad_points();
    std::vector<double> s_times;
    std::vector<std::pair<double, int>> order;
    for (int l = 0; l < Ls; ++l) order.emplace_back(std::fmod(m * o.tau * l / Ls, o.tau), l);
    std::sort(order.begin(), order.end());
    Mat Y(2 * b.n, Ls);
    std::vector<double> times{0.0};
    for (auto& [s, l] : order)
        if (s > times.back()) times.push_back(s);
    auto tr = integrate_flow_at(b, o.y0, times.size() > 1 ? times : std::vector<double>{0.0, o.tau}, fo);
    for (auto& [s, l] : order) {
        auto it = std::lower_bound(tr.t.begin(), tr.t.end(), s);
        Y.col(l) = tr.y[it - tr.t.begin()];
    }
    const double lam = std::pow(m * o.tau / alpha, 1.0 / (alpha - 2.0));
    Mat U(2 * b.n, Ls);
    for (int l = 0; l < Ls; ++l) U.col(l) = lam * m * o.tau * flow_field(b, Y.col(l));
    DualSeed seed;
    seed.coeffs = da.coefficients_from_samples(U);
    seed.label = "orbit tau=" + std::to_string(o.tau) + " m=" + std::to_string(m);
    return seed;
}

namespace detail {

inline void hessian_counts(DualCriticalPoint& cp, const Mat& H, const Vec& udot, double rel_tol)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    cp.hess_tol = rel_tol * scale;
    cp.hessian_index = 0;
    cp.hessian_nullity = 0;
    cp.smallest_nonzero = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -cp.hess_tol) ++cp.hessian_index;
        else if (ev(i) <= cp.hess_tol) ++cp.hessian_nullity;
        if (std::abs(ev(i)) > cp.hess_tol) cp.smallest_nonzero = std::min(cp.smallest_nonzero, std::abs(ev(i)));
    }
    double un = udot.norm();
    cp.s1_in_kernel = un > 0 && (H * udot).norm() <= cp.hess_tol * un;
}

} // namespace detail

/// Newton iteration on the gradient from one seed; the rank-one term along
/// u' removes the time-translation kernel from the linear solves.
inline DualCriticalPoint dual_newton(const DualAction& da, Vec c, const DualOptions& opt, const std::string& label = "")
{
    DualCriticalPoint cp;
    cp.K = da.K();
    cp.seed_label = label;
    c = optimal_scaling(da, c);
    for (int it = 0; it <= opt.newton_max_iter; ++it) {
        auto d = da.derivatives(c, true);
        cp.grad_norm = d.grad.norm();
        Vec v = da.time_derivative(c);
        if (cp.grad_norm <= opt.grad_tol * std::max(1.0, c.norm()) || it == opt.newton_max_iter) {
            cp.converged = cp.grad_norm <= opt.grad_tol * std::max(1.0, c.norm());
            cp.value = d.value;
            cp.fourier_coeffs = c;
            detail::hessian_counts(cp, d.hess, v, opt.hess_rel_tol);
            return cp;
        }
        double hn = d.hess.cwiseAbs().maxCoeff();
        Vec vn = v / std::max(v.norm(), 1e-300);
        Mat A = d.hess + hn * vn * vn.transpose();
        Vec step = A.partialPivLu().solve(-d.grad);
        // damp steps that would move far compared to the loop itself
        double lim = 0.5 * c.norm();
        if (step.norm() > lim) step *= lim / step.norm();
        c += step;
    }
    return cp;
}

/// Gradient descent with backtracking followed by Newton polishing.
inline DualCriticalPoint dual_descent(const DualAction& da, Vec c, const DualOptions& opt, const std::string& label = "")
{
    c = optimal_scaling(da, c);
    double f = da.value(c);
    double t = 1.0;
    for (int it = 0; it < opt.descent_iter; ++it) {
        auto d = da.derivatives(c, false);
        if (d.grad.norm() <= 1e-6 * std::max(1.0, c.norm())) break;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
            Vec cn = c - t * d.grad;
            double fn;
            try {
                fn = da.value(cn);
            } catch (const Error&) {
                continue;
            }
            if (fn < f - 1e-4 * t * d.grad.squaredNorm()) {
                c = cn;
                f = fn;
                moved = true;
                t *= 2.0;
                break;
            }
        }
        if (!moved) break;
    }
    return dual_newton(da, c, opt, label);
}

struct DualSearchResult {
    std::vector<DualCriticalPoint> points;
    std::vector<std::string> diagnostics;
};

/// Newton from each seed; `descend` first runs gradient descent (which
/// lands on minima).  Non-convergent seeds go to the diagnostics.
inline DualSearchResult dual_action_search(const ConvexBody& b, const std::vector<DualSeed>& seeds,
                                           const DualOptions& opt = {}, bool descend = false)
{
    DualAction da(b, opt.alpha, opt.K, opt.quad_points, opt.force_generic_fenchel);
    DualSearchResult res;
    for (const auto& s : seeds) {
        try {
            auto cp = descend ? dual_descent(da, s.coeffs, opt, s.label) : dual_newton(da, s.coeffs, opt, s.label);
            if (!cp.converged) {
                res.diagnostics.push_back(s.label + ": no convergence (gradient " + std::to_string(cp.grad_norm) + ")");
                continue;
            }
            res.points.push_back(std::move(cp));
        } catch (const Error& e) {
            res.diagnostics.push_back(s.label + ": " + e.what());
        }
    }
    return res;
}

/// Random low-mode seeds drawn from the generator.
inline std::vector<DualSeed> random_dual_seeds(const DualAction& da, int n, int count, std::uint64_t seed,
                                               int modes = 3)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<DualSeed> out;
    for (int s = 0; s < count; ++s) {
        DualSeed d;
        d.coeffs = Vec::Zero(da.dim());
        for (int k = 1; k <= std::min(modes, da.K()); ++k)
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < 2 * n; ++i) d.coeffs(DualAction::idx(n, k, c, i)) = g(rng) / k;
        // make the quadratic part negative so the ray has a critical point
        if (da.quadratic(d.coeffs) > 0)
            for (int k = 1; k <= std::min(modes, da.K()); ++k)
                for (int i = 0; i < 2 * n; ++i) std::swap(d.coeffs(DualAction::idx(n, k, 0, i)), d.coeffs(DualAction::idx(n, k, 1, i)));
        d.label = "random " + std::to_string(s);
        out.push_back(std::move(d));
    }
    return out;
}

/// Matches a critical point to (orbit, iterate): the solution z = lam y
/// has lam = mean sqrt(F(z)) and runs m = alpha lam^{alpha-2} / tau times
/// around an orbit of period tau; the radial projection must lie on it.
inline void match_to_orbits(DualCriticalPoint& cp, const DualAction& da, const ConvexBody& b,
                            const std::vector<ClosedOrbit>& orbits, double tol = 1e-3)
{
    Mat Z = da.solution_values(cp.fourier_coeffs);
    double lam = 0;
    for (int l = 0; l < Z.cols(); ++l) lam += std::sqrt(b.F(Z.col(l)));
    lam /= Z.cols();
    const double alpha = da.fenchel().alpha();
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < orbits.size(); ++j) {
        double mr = alpha * std::pow(lam, alpha - 2) / orbits[j].tau;
        int m = static_cast<int>(std::lround(mr));
        if (m < 1 || std::abs(mr - m) > 1e-4 * m) continue;
        double dist = 0;
        for (int l = 0; l < Z.cols(); ++l) {
            Vec y = b.project(Z.col(l));
            double dm = std::numeric_limits<double>::infinity();
            const auto& tr = orbits[j].trajectory;
            for (size_t k = 0; k + 1 < tr.size(); ++k) {
                Vec e = tr[k + 1] - tr[k];
                double t = std::clamp((y - tr[k]).dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
                dm = std::min(dm, (tr[k] + t * e - y).norm());
            }
            dist = std::max(dist, dm);
        }
        if (dist < best) {
            best = dist;
            if (dist < tol * b.diameter_bound()) cp.matched_orbit = std::make_pair(static_cast<int>(j), m);
        }
    }
    cp.match_distance = best;
}

} // namespace maslov
