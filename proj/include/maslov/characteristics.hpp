#pragma once
// Closed characteristics y' = J N(y) on the boundary of a convex body:
// exact ellipsoid orbits, numerical search by shooting, monodromy paths,
// Floquet classification and index tables.

#include "body.hpp"
#include "index.hpp"
#include "index_jump.hpp"
#include "normal_form.hpp"

#include <boost/numeric/odeint.hpp>

namespace maslov {

struct IntegrationError : Error {
    double t;
    IntegrationError(const std::string& what, double t_) : Error(what), t(t_) {}
};

struct FlowOptions {
    double ode_tol = 1e-13;
    double energy_tol = 1e-9;
    double initial_dt = 1e-3;
    long max_steps = 2000000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> y;
    double max_energy_drift = 0;
};

inline Vec apply_J(const Vec& v)
{
    const auto n = v.size() / 2;
    Vec out(v.size());
    out.head(n) = -v.tail(n);
    out.tail(n) = v.head(n);
    return out;
}

/// Right-hand side J N(y) of the characteristic flow.
inline Vec flow_field(const ConvexBody& b, const Vec& y) { return apply_J(b.normal(y)); }

namespace detail {

using State = std::vector<double>;

inline Vec to_vec(const State& s, size_t off, size_t len)
{
    return Eigen::Map<const Vec>(s.data() + off, static_cast<Eigen::Index>(len));
}

template <class System, class Observer>
void run_ode(System sys, State& x, double t0, const std::vector<double>& times, const FlowOptions& o, Observer obs)
{
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(o.ode_tol, o.ode_tol, ode::runge_kutta_fehlberg78<State>());
    double dt = (times.back() >= t0 ? 1.0 : -1.0) * o.initial_dt;
    long steps = 0;
    auto guarded = [&](State& s, double t) {
        if (++steps > o.max_steps) throw IntegrationError("integration step budget exhausted", t);
        for (double v : s)
            if (!std::isfinite(v)) throw IntegrationError("integration produced non-finite values", t);
        obs(s, t);
    };
    try {
        ode::integrate_times(stepper, sys, x, times.begin(), times.end(), dt, guarded);
    } catch (const IntegrationError&) {
        throw;
    } catch (const std::exception& e) {
        throw IntegrationError(std::string("step size collapse: ") + e.what(), t0);
    }
}

inline std::vector<double> linspace(double a, double b, int k)
{
    std::vector<double> t(k + 1);
    for (int i = 0; i <= k; ++i) t[i] = a + (b - a) * double(i) / k;
    t.back() = b;
    return t;
}

} // namespace detail

/// Samples of the flow from y0 at the given times (first entry is the start).
inline Trajectory integrate_flow_at(const ConvexBody& b, const Vec& y0, const std::vector<double>& times,
                                    const FlowOptions& o = {})
{
    if (std::abs(b.F(y0) - 1.0) > 1e-10) throw InputError("initial point is not on the boundary");
    if (times.size() < 2) throw InputError("need at least two output times");
    detail::State x(y0.data(), y0.data() + y0.size());
    Trajectory tr;
    auto sys = [&b](const detail::State& s, detail::State& ds, double) {
        Vec y = detail::to_vec(s, 0, s.size());
        Vec f = flow_field(b, y);
        ds.assign(f.data(), f.data() + f.size());
    };
    detail::run_ode(sys, x, times.front(), times, o, [&](const detail::State& s, double t) {
        Vec y = detail::to_vec(s, 0, s.size());
        tr.t.push_back(t);
        tr.y.push_back(y);
        tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(b.F(y) - 1.0));
    });
    if (tr.max_energy_drift > o.energy_tol)
        throw IntegrationError("energy drift " + std::to_string(tr.max_energy_drift) + " exceeds tolerance",
                               tr.t.back());
    return tr;
}

/// Trajectory on [0, t_end] sampled at `samples` + 1 uniform times.
inline Trajectory integrate_flow(const ConvexBody& b, const Vec& y0, double t_end, int samples = 256,
                                 const FlowOptions& o = {})
{
    if (t_end == 0.0) throw InputError("t_end must be nonzero");
    return integrate_flow_at(b, y0, detail::linspace(0.0, t_end, samples), o);
}

struct VariationalSample {
    double t;
    Vec y;
    Mat Phi;
};

/// Flow together with the linearized flow Phi' = J DN(y) Phi, Phi(0) = I.
inline std::vector<VariationalSample> integrate_variational(const ConvexBody& b, const Vec& y0,
                                                            const std::vector<double>& times,
                                                            const FlowOptions& o = {})
{
    const int N = 2 * b.n;
    const Mat J = standard_J(b.n);
    detail::State x(N + N * N, 0.0);
    for (int i = 0; i < N; ++i) x[i] = y0(i);
    for (int i = 0; i < N; ++i) x[N + i * N + i] = 1.0; // column-major identity
    auto sys = [&](const detail::State& s, detail::State& ds, double) {
        Vec y = detail::to_vec(s, 0, N);
        Eigen::Map<const Mat> Phi(s.data() + N, N, N);
        ds.resize(s.size());
        Vec f = flow_field(b, y);
        Mat dPhi = J * b.normal_jacobian(y) * Phi;
        std::copy(f.data(), f.data() + N, ds.begin());
        std::copy(dPhi.data(), dPhi.data() + N * N, ds.begin() + N);
    };
    std::vector<VariationalSample> out;
    detail::run_ode(sys, x, times.front(), times, o, [&](const detail::State& s, double t) {
        VariationalSample v;
        v.t = t;
        v.y = detail::to_vec(s, 0, N);
        v.Phi = Eigen::Map<const Mat>(s.data() + N, N, N);
        out.push_back(std::move(v));
    });
    return out;
}

struct OrbitFlags {
    bool prime = true;
    bool nondegenerate = false;
    bool elliptic = false;
    bool hyperbolic = false;
    bool borderline = false;
};

struct ClosedOrbit {
    double tau = 0;
    Vec y0;
    std::vector<double> times;
    std::vector<Vec> trajectory;
    SymplecticPath monodromy_path;
    Mat monodromy_end;
    UnitSpectrum floquet;
    std::vector<cplx> multipliers;
    OrbitFlags flags;
    int multiplicity = 1;          // > 1 when the stored loop traverses a prime orbit several times
    double energy_drift = 0;
    double closing_error = 0;
    std::string source;            // "exact" or "shooting"
};

/// Floquet flags following the definitions: non-degenerate iff the
/// multiplier 1 has algebraic multiplicity exactly 2, elliptic iff every
/// multiplier is on U, hyperbolic iff 1 is double and nothing else is on U.
inline OrbitFlags classify(const Mat& monodromy_end, const Tolerances& tol = {})
{
    OrbitFlags f;
    auto us = unit_spectrum(monodromy_end, tol);
    int mult_one = 0;
    for (const auto& e : us.entries)
        if (e.omega == cplx(1.0)) mult_one = e.alg_mult;
    f.nondegenerate = mult_one == 2;
    f.elliptic = us.off_circle.empty();
    f.hyperbolic = mult_one == 2 && us.total_e == 2;
    f.borderline = us.ill_conditioned;
    return f;
}

inline void attach_floquet(ClosedOrbit& o, const Tolerances& tol = {})
{
    o.monodromy_end = o.monodromy_path.end_value();
    o.floquet = unit_spectrum(o.monodromy_end, tol);
    Eigen::EigenSolver<Mat> es(o.monodromy_end, false);
    o.multipliers.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(o.multipliers.begin(), o.multipliers.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    bool prime = o.flags.prime;
    o.flags = classify(o.monodromy_end, tol);
    o.flags.prime = prime;
}

/// Period 4 pi r_j^2 of the circle in the j-th coordinate plane.
inline double ellipsoid_period(const std::vector<double>& r, int j) { return 4.0 * pi * r[j] * r[j]; }

/// Exact linearized flow along the j-th planar orbit: rotation
/// R(t / (2 r_i^2)) in every plane, and in plane j an extra shear
/// I - 2 q_j t E21 in the co-rotating frame.
inline Mat ellipsoid_monodromy_at(const std::vector<double>& r, int j, double t)
{
    const int n = static_cast<int>(r.size());
    Mat M = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        double q = 1.0 / (2.0 * r[i] * r[i]);
        double c = std::cos(q * t), s = std::sin(q * t);
        Eigen::Matrix2d R;
        R << c, -s, s, c;
        Eigen::Matrix2d B = R;
        if (i == j) {
            Eigen::Matrix2d S;
            S << 1, 0, -2.0 * q * t, 1;
            B = R * S;
        }
        M(i, i) = B(0, 0);
        M(i, n + i) = B(0, 1);
        M(n + i, i) = B(1, 0);
        M(n + i, n + i) = B(1, 1);
    }
    return M;
}

/// The n planar orbits of an ellipsoid, built from the exact linear flow.
inline std::vector<ClosedOrbit> ellipsoid_characteristics(const ConvexBody& b, int samples = 256)
{
    if (b.kind != BodyKind::Ellipsoid) throw InputError("exact construction needs an ellipsoid");
    std::vector<ClosedOrbit> out;
    const int n = b.n;
    for (int j = 0; j < n; ++j) {
        ClosedOrbit o;
        o.source = "exact";
        o.tau = ellipsoid_period(b.r, j);
        const double rad = std::sqrt(2.0) * b.r[j];
        const double q = 1.0 / (2.0 * b.r[j] * b.r[j]);
        o.y0 = Vec::Zero(2 * n);
        o.y0(j) = rad;
        for (int k = 0; k <= samples; ++k) {
            double t = o.tau * k / samples;
            Vec y = Vec::Zero(2 * n);
            y(j) = rad * std::cos(q * t);
            y(n + j) = rad * std::sin(q * t);
            o.times.push_back(t);
            o.trajectory.push_back(y);
        }
        std::vector<double> r = b.r;
        double tau = o.tau;
        o.monodromy_path = SymplecticPath(n);
        o.monodromy_path.add_function([r, j](double t) { return ellipsoid_monodromy_at(r, j, t); }, tau);
        attach_floquet(o);
        out.push_back(std::move(o));
    }
    std::sort(out.begin(), out.end(), [](const ClosedOrbit& a, const ClosedOrbit& c) { return a.tau < c.tau; });
    return out;
}

/// Monodromy path from the variational equation sampled at `samples` + 1
/// uniform times; samples whose symplectic drift exceeds the tolerance are
/// projected back, and drift beyond 1e-6 is an error.
inline SymplecticPath monodromy(const ConvexBody& b, const Vec& y0, double tau, int samples = 256,
                                const FlowOptions& o = {}, const Tolerances& tol = {})
{
    auto vs = integrate_variational(b, y0, detail::linspace(0.0, tau, samples), o);
    const Mat J = standard_J(b.n);
    std::vector<double> t;
    std::vector<Mat> M;
    for (auto& v : vs) {
        double scale = std::max(1.0, v.Phi.cwiseAbs().maxCoeff());
        double defect = symplectic_defect(v.Phi);
        if (defect > 1e-6 * scale * scale) throw IntegrationError("monodromy lost symplecticity", v.t);
        if (defect > tol.symplectic * scale * scale) v.Phi = symplectify(v.Phi, J);
        t.push_back(v.t);
        M.push_back(v.Phi);
    }
    M.front() = Mat::Identity(2 * b.n, 2 * b.n);
    SymplecticPath p(b.n);
    p.add_samples(std::move(t), std::move(M));
    return p;
}

inline SymplecticPath monodromy(const ConvexBody& b, const ClosedOrbit& orbit, int samples = 256,
                                const FlowOptions& o = {})
{
    return monodromy(b, orbit.y0, orbit.tau, samples, o);
}

// ---------------------------------------------------------------------------
// Orbit search

struct OrbitSearchOptions {
    int random_seeds = 6;
    std::uint64_t seed = 1;
    double t_max = 0;            // 0: two and a half times the longest ellipsoid period of the radii
    int scan_samples = 4000;     // samples of the scan trajectory
    double return_tol = 0.05;    // close-return threshold relative to the diameter
    int candidates_per_seed = 3;
    double newton_tol = 1e-10;
    int newton_max_iter = 30;
    double dedup_tol = 1e-5;     // relative to the diameter
    int max_multiplicity = 6;
    int monodromy_samples = 256;
    FlowOptions flow;
};

struct OrbitSearchResult {
    std::vector<ClosedOrbit> orbits;      // prime, geometrically distinct, sorted by period
    std::vector<std::string> diagnostics; // dropped seeds and candidates
};

namespace detail {

struct ShootResult {
    bool ok = false;
    Vec y0;
    double tau = 0;
    double residual = 0;
    int iterations = 0;
};

/// Gauss-Newton on (y(tau) - y0, F(y0) - 1, phase) in the unknowns (y0, tau).
inline ShootResult shoot(const ConvexBody& b, Vec y0, double tau, const OrbitSearchOptions& opt)
{
    const int N = 2 * b.n;
    const Vec yref = y0;
    const Vec fref = flow_field(b, yref);
    ShootResult res;
    double scale = b.diameter_bound();
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        if (!(tau > 0)) return res;
        auto vs = integrate_variational(b, y0, {0.0, tau}, opt.flow);
        const Vec& yT = vs.back().y;
        const Mat& Phi = vs.back().Phi;
        Vec r(N + 2);
        r.head(N) = yT - y0;
        r(N) = b.F(y0) - 1.0;
        r(N + 1) = (y0 - yref).dot(fref);
        res.residual = r.cwiseAbs().maxCoeff();
        res.iterations = it;
        if (res.residual < opt.newton_tol * scale) {
            res.ok = true;
            res.y0 = b.project(y0);
            res.tau = tau;
            return res;
        }
        Mat A = Mat::Zero(N + 2, N + 1);
        A.topLeftCorner(N, N) = Phi - Mat::Identity(N, N);
        A.block(0, N, N, 1) = flow_field(b, yT);
        A.block(N, 0, 1, N) = b.dF(y0).transpose();
        A.block(N + 1, 0, 1, N) = fref.transpose();
        Vec step = A.completeOrthogonalDecomposition().solve(-r);
        double damp = 1.0;
        double limit = 0.2 * scale;
        if (step.head(N).norm() > limit) damp = limit / step.head(N).norm();
        y0 += damp * step.head(N);
        tau += damp * step(N);
    }
    return res;
}

/// Close returns of the trajectory from y0: local minima of |y(t) - y0|
/// below the threshold, after the trajectory has left the threshold ball.
inline std::vector<double> close_returns(const Trajectory& tr, const Vec& y0, double thr, int max_count)
{
    std::vector<double> d(tr.t.size());
    for (size_t i = 0; i < tr.t.size(); ++i) d[i] = (tr.y[i] - y0).norm();
    std::vector<double> out;
    bool left = false;
    for (size_t i = 1; i + 1 < d.size() && int(out.size()) < max_count; ++i) {
        if (d[i] > 2 * thr) left = true;
        if (left && d[i] < thr && d[i] <= d[i - 1] && d[i] <= d[i + 1]) out.push_back(tr.t[i]);
    }
    return out;
}

/// Smallest k with y(tau / k) = y0, which makes tau / k the minimal period.
inline int loop_multiplicity(const ConvexBody& b, const Vec& y0, double tau, int max_k, const FlowOptions& o)
{
    double scale = b.diameter_bound();
    for (int k = max_k; k >= 2; --k) {
        auto tr = integrate_flow_at(b, y0, {0.0, tau / k}, o);
        if ((tr.y.back() - y0).norm() < 1e-7 * scale) return k;
    }
    return 1;
}

/// Time shift s with y_a(s) closest to p, refined by Newton on the phase.
inline double nearest_shift(const ConvexBody& b, const ClosedOrbit& a, const Vec& p, const FlowOptions& o)
{
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.trajectory.size(); ++i) {
        double d = (a.trajectory[i] - p).norm();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    double s = a.times[best];
    for (int it = 0; it < 8; ++it) {
        Vec y = s > 0 ? integrate_flow_at(b, a.y0, {0.0, s}, o).y.back() : a.y0;
        Vec f = flow_field(b, y);
        double ds = (p - y).dot(f) / f.squaredNorm();
        s += ds;
        if (std::abs(ds) < 1e-14 * a.tau) break;
    }
    s = std::fmod(s, a.tau);
    if (s < 0) s += a.tau;
    return s;
}

/// Largest distance between y_b(t) and y_a(t + s) over the samples of b,
/// after choosing s so that y_a(s) is closest to y_b(0).
inline double shifted_distance(const ConvexBody& b, const ClosedOrbit& a, const ClosedOrbit& c, const FlowOptions& o)
{
    double s = nearest_shift(b, a, c.y0, o);
    Vec start = s > 0 ? integrate_flow_at(b, a.y0, {0.0, s}, o).y.back() : a.y0;
    start = b.project(start);
    auto tr = integrate_flow_at(b, start, c.times, o);
    double d = 0;
    for (size_t i = 0; i < tr.y.size(); ++i) d = std::max(d, (tr.y[i] - c.trajectory[i]).norm());
    return d;
}

} // namespace detail

/// True when the two orbits have the same image: equal periods and
/// trajectories that agree after an optimal time shift.
inline bool same_orbit(const ConvexBody& b, const ClosedOrbit& a, const ClosedOrbit& c, double tol = 1e-5,
                       const FlowOptions& o = {})
{
    if (std::abs(a.tau - c.tau) > 1e-6 * std::max(a.tau, c.tau)) return false;
    return detail::shifted_distance(b, a, c, o) < tol * b.diameter_bound();
}

/// Builds the orbit record (samples, monodromy, Floquet data) of a periodic
/// point with known period.
inline ClosedOrbit make_orbit(const ConvexBody& b, const Vec& y0, double tau, const OrbitSearchOptions& opt = {})
{
    ClosedOrbit o;
    o.source = "shooting";
    o.y0 = y0;
    o.tau = tau;
    auto tr = integrate_flow(b, y0, tau, opt.monodromy_samples, opt.flow);
    o.times = tr.t;
    o.trajectory = tr.y;
    o.energy_drift = tr.max_energy_drift;
    o.closing_error = (tr.y.back() - y0).norm();
    o.monodromy_path = monodromy(b, y0, tau, opt.monodromy_samples, opt.flow);
    o.multiplicity = detail::loop_multiplicity(b, y0, tau, opt.max_multiplicity, opt.flow);
    o.flags.prime = o.multiplicity == 1;
    attach_floquet(o);
    return o;
}

/// Seeds on coordinate axes and in random directions, close returns of
/// the scan trajectory, Newton shooting, reduction to the minimal period
/// and removal of duplicates.
inline OrbitSearchResult find_periodic_orbits(const ConvexBody& b, const OrbitSearchOptions& opt = {})
{
    OrbitSearchResult res;
    const int N = 2 * b.n;
    double longest = 0;
    for (int i = 0; i < b.n; ++i) longest = std::max(longest, ellipsoid_period(b.r, i));
    const double t_max = opt.t_max > 0 ? opt.t_max : 2.5 * longest;
    const double diam = b.diameter_bound();

    std::vector<Vec> seeds;
    for (int i = 0; i < b.n; ++i) {
        Vec e = Vec::Zero(N);
        e(i) = 1.0;
        seeds.push_back(b.project(e));
    }
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < opt.random_seeds; ++k) {
        Vec z(N);
        for (int i = 0; i < N; ++i) z(i) = g(rng);
        seeds.push_back(b.project(z));
    }

    for (size_t s = 0; s < seeds.size(); ++s) {
        const Vec& y0 = seeds[s];
        Trajectory scan;
        try {
            scan = integrate_flow(b, y0, t_max, opt.scan_samples, opt.flow);
        } catch (const Error& e) {
            res.diagnostics.push_back("seed " + std::to_string(s) + ": " + e.what());
            continue;
        }
        auto cands = detail::close_returns(scan, y0, opt.return_tol * diam, opt.candidates_per_seed);
        if (cands.empty()) res.diagnostics.push_back("seed " + std::to_string(s) + ": no close return");
        for (double t0 : cands) {
            detail::ShootResult sr;
            try {
                sr = detail::shoot(b, y0, t0, opt);
            } catch (const Error& e) {
                res.diagnostics.push_back("seed " + std::to_string(s) + ": " + e.what());
                continue;
            }
            if (!sr.ok) {
                res.diagnostics.push_back("seed " + std::to_string(s) + ": Newton did not converge from t = " +
                                          std::to_string(t0) + " (residual " + std::to_string(sr.residual) + ")");
                continue;
            }
            int k = detail::loop_multiplicity(b, sr.y0, sr.tau, opt.max_multiplicity, opt.flow);
            double tau = sr.tau / k;
            if (k > 1)
                res.diagnostics.push_back("seed " + std::to_string(s) + ": converged to a " + std::to_string(k) +
                                          "-fold iterate; reduced to the prime orbit");
            ClosedOrbit o = make_orbit(b, sr.y0, tau, opt);
            bool dup = false;
            for (const auto& other : res.orbits)
                if (same_orbit(b, other, o, opt.dedup_tol, opt.flow)) {
                    dup = true;
                    break;
                }
            if (!dup) res.orbits.push_back(std::move(o));
            break; // first converged candidate per seed
        }
    }
    std::sort(res.orbits.begin(), res.orbits.end(),
              [](const ClosedOrbit& a, const ClosedOrbit& c) { return a.tau < c.tau; });
    if (res.orbits.empty()) res.diagnostics.push_back("none found");
    return res;
}

/// Multiplicity k when y0 closes up already at tau / k.
inline int minimal_period_multiplicity(const ConvexBody& b, const Vec& y0, double tau, int max_k = 6,
                                       const FlowOptions& o = {})
{
    return detail::loop_multiplicity(b, y0, tau, max_k, o);
}

// ---------------------------------------------------------------------------
// Index tables

struct OrbitIndexTable {
    int n = 0;
    int i1 = 0, nu1 = 0;
    NormalFormDecomposition d;
    std::vector<std::pair<long long, int>> table;       // (i(y,m), nu(y,m)) closed form, m = 1..m_max
    std::vector<std::pair<int, int>> direct;            // direct engine values for m <= direct_m_max
    std::vector<int> mismatches;                        // m where direct and closed form differ
    double mean = 0;
    int s_plus = 0;

    long long ekeland_index(int m) const { return table.at(m - 1).first - n; }
    int ekeland_nullity(int m) const { return table.at(m - 1).second; }
    OrbitIndexData data() const { return OrbitIndexData::make(d, i1, nu1); }
};

/// i(y,1) from the crossing engine, the remaining table from the closed
/// forms, and direct cross-checks up to direct_m_max.
inline OrbitIndexTable orbit_indices(const ClosedOrbit& o, int m_max, int direct_m_max = 12,
                                     const IndexOptions& iopt = {}, const Tolerances& tol = {})
{
    OrbitIndexTable t;
    t.n = o.monodromy_path.n();
    auto first = index_nullity(o.monodromy_path, 1.0, iopt);
    t.i1 = first.index;
    t.nu1 = first.nullity;
    t.d = decompose(o.monodromy_path.end_value(), tol);
    check_parity(t.d, t.i1);
    for (int m = 1; m <= m_max; ++m) t.table.emplace_back(iteration_index(t.d, t.i1, m), iteration_nullity(t.d, t.nu1, m));
    for (int m = 1; m <= std::min(direct_m_max, m_max); ++m) {
        auto p = m == 1 ? first : index_nullity(iterate_path(o.monodromy_path, m), 1.0, iopt);
        t.direct.emplace_back(p.index, p.nullity);
        if (p.index != t.table[m - 1].first || p.nullity != t.table[m - 1].second) t.mismatches.push_back(m);
    }
    t.mean = mean_index(t.d, t.i1);
    t.s_plus = splitting_numbers(t.d, 1.0).s_plus;
    return t;
}

} // namespace maslov
