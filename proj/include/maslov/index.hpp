#pragma once
// Direct computation of the omega-index of a symplectic path by counting
// signed crossings of the catenated, generically perturbed path with the
// hypersurface {M : det(M - omega I) = 0}.

#include "path.hpp"

#include <cstdint>
#include <map>
#include <numeric>
#include <random>

namespace maslov {

struct IndexUncertainError : Error {
    double a, b;
    IndexUncertainError(const std::string& what, double a_, double b_) : Error(what), a(a_), b(b_) {}
};

struct IndexOptions {
    int base_samples = 48;      // initial grid per exponential or closed-form segment
    int max_sampled_grid = 2048; // cap on natural grids of sampled segments
    double eps = 1e-5;          // endpoint rotation and co-orientation step
    double bump = 0.15;         // size of the generic perturbation
    double zero_tol = 1e-12;    // bisection width in segment parameter
    double merge_width = 1e-9;  // zeros closer than this are merged
    double min_width = 1e-11;   // refinement floor before declaring uncertainty
    int attempts = 4;           // independent perturbations tried
    long max_evals = 4000000;
    std::uint64_t seed = 20240611;
    Tolerances tol;
};

struct IndexPair {
    int index = 0;
    int nullity = 0;
    cplx omega = 1.0;
    bool degenerate_endpoint = false;
    int crossings = 0;
    long evaluations = 0;
    std::vector<std::pair<double, int>> crossing_log; // global parameter, signed contribution
};

namespace detail {

struct Piece {
    std::function<Mat(double)> f;      // unperturbed value, u in [0, 1]
    std::function<double(double)> w;   // perturbation weight
    std::vector<double> grid;          // initial sample parameters
    double offset = 0.0;               // global parameter of u = 0
};

struct Probe {
    double u = 0;
    Mat M;
    double D = 0;
    Mat Xinv;   // (M - omega I)^{-1} for real omega
    CMat Cinv;  // same for complex omega
};

inline int sgn(double x) { return (x > 0) - (x < 0); }

class CrossingCounter {
public:
    CrossingCounter(int n, cplx omega, const Mat& B, const IndexOptions& o)
        : n_(n), N_(2 * n), omega_(omega), real_(omega.imag() == 0.0), opt_(o)
    {
        J_ = standard_J(n);
        K_ = J_ * B;
        I_ = Mat::Identity(N_, N_);
        phase_ = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(std::conj(omega), n);
    }

    long evaluations = 0;
    int crossings = 0;
    std::vector<std::pair<double, int>> log;

    int count(const Piece& p)
    {
        std::vector<Probe> pts;
        pts.reserve(p.grid.size());
        for (double u : p.grid) pts.push_back(probe(p, u));
        int total = 0;
        for (size_t i = 0; i + 1 < pts.size(); ++i) total += rec(p, pts[i], pts[i + 1]);
        return total;
    }

    /// D_omega at M; optionally stores the inverse of M - omega I in the probe.
    double detect(const Mat& M, Probe* pr = nullptr)
    {
        ++evaluations;
        if (evaluations > opt_.max_evals) throw IndexUncertainError("evaluation budget exhausted", 0, 0);
        if (real_) {
            Eigen::PartialPivLU<Mat> lu(M - omega_.real() * I_);
            if (pr) pr->Xinv = lu.inverse();
            return phase_.real() * lu.determinant();
        }
        Eigen::PartialPivLU<CMat> lu(M.cast<cplx>() - omega_ * CMat::Identity(N_, N_));
        if (pr) pr->Cinv = lu.inverse();
        return (phase_ * lu.determinant()).real();
    }

    double D_only(const Mat& M) { return detect(M); }

private:
    Mat perturbation(double beta) const
    {
        Mat H = (0.5 * beta) * K_;
        return (I_ - H).partialPivLu().solve(I_ + H);
    }

    Probe probe(const Piece& p, double u, bool allow_zero = false)
    {
        Probe r;
        r.u = u;
        Mat G = p.f(u);
        double beta = opt_.bump * p.w(u) * (0.75 + 0.25 * std::sin(1.7 * (p.offset + u)));
        r.M = beta == 0.0 ? G : Mat(G * perturbation(beta));
        r.D = detect(r.M, &r);
        if (allow_zero && r.D == 0.0) return r;
        if (r.D == 0.0 || (real_ ? !r.Xinv.allFinite() : !r.Cinv.allFinite())) throw IndexUncertainError("path sample lies on the singular set", p.offset + u, p.offset + u);
        return r;
    }

    /// Sign of the derivative of D along M e^{t J} at the crossing point.
    int coorientation(const Mat& M, double where)
    {
        auto rot = [&](double e) { return Mat(std::cos(e) * I_ + std::sin(e) * J_); };
        int s1 = sgn(D_only(M * rot(opt_.eps)) - D_only(M * rot(-opt_.eps)));
        int s2 = sgn(D_only(M * rot(0.5 * opt_.eps)) - D_only(M * rot(-0.5 * opt_.eps)));
        if (s1 == 0 || s1 != s2) throw IndexUncertainError("co-orientation sign unstable", where, where);
        return s1;
    }

    /// Upper bound |A^8|^{1/8} for the spectral radius of A.
    template <class MatT>
    static double radius_bound(const MatT& A)
    {
        MatT A2 = A * A;
        MatT A4 = A2 * A2;
        MatT A8 = A4 * A4;
        return std::pow(A8.norm(), 0.125);
    }

    /// M - omega I stays invertible along the chord from a to b: X + s dM is
    /// singular only if X^{-1} dM has an eigenvalue -1/s, so a spectral
    /// radius below one at either end excludes a crossing.  Both ends are
    /// required to sit below one half as a margin for curvature.
    bool certified(const Probe& a, const Probe& b) const
    {
        Mat d = b.M - a.M;
        if (real_) return radius_bound(Mat(a.Xinv * d)) <= 0.5 && radius_bound(Mat(b.Xinv * d)) <= 0.5;
        CMat dc = d.cast<cplx>();
        return radius_bound(CMat(a.Cinv * dc)) <= 0.5 && radius_bound(CMat(b.Cinv * dc)) <= 0.5;
    }

    int rec(const Piece& p, const Probe& a, const Probe& b)
    {
        if (sgn(a.D) != sgn(b.D)) {
            // Illinois variant of regula falsi, falling back to bisection
            // whenever the bracket fails to shrink by half.
            Probe lo = a, hi = b;
            double flo = lo.D, fhi = hi.D;
            int side = 0;
            double z = -1.0;
            while (hi.u - lo.u > opt_.zero_tol) {
                double width = hi.u - lo.u;
                double u = (lo.u * fhi - hi.u * flo) / (fhi - flo);
                double margin = 1e-3 * width;
                if (!(u > lo.u + margin && u < hi.u - margin)) u = 0.5 * (lo.u + hi.u);
                Probe mid = probe(p, u, true);
                if (mid.D == 0.0) {
                    z = u;
                    break;
                }
                if (sgn(mid.D) == sgn(lo.D)) {
                    lo = std::move(mid);
                    flo = lo.D;
                    if (side == -1) fhi *= 0.5;
                    side = -1;
                } else {
                    hi = std::move(mid);
                    fhi = hi.D;
                    if (side == 1) flo *= 0.5;
                    side = 1;
                }
                if (hi.u - lo.u > 0.5 * width) {
                    Probe m2 = probe(p, 0.5 * (lo.u + hi.u), true);
                    if (m2.D == 0.0) {
                        z = m2.u;
                        break;
                    }
                    if (sgn(m2.D) == sgn(lo.D)) {
                        lo = std::move(m2);
                        flo = lo.D;
                    } else {
                        hi = std::move(m2);
                        fhi = hi.D;
                    }
                    side = 0;
                }
            }
            if (z < 0.0) z = 0.5 * (lo.u + hi.u);
            Mat Mz = p.f(z);
            double beta = opt_.bump * p.w(z) * (0.75 + 0.25 * std::sin(1.7 * (p.offset + z)));
            if (beta != 0.0) Mz = Mz * perturbation(beta);
            int contribution = sgn(hi.D) * coorientation(Mz, p.offset + z);
            ++crossings;
            log.emplace_back(p.offset + z, contribution);
            double ul = z - opt_.merge_width, ur = z + opt_.merge_width;
            Probe left = ul > a.u ? probe(p, ul) : a;
            Probe right = ur < b.u ? probe(p, ur) : b;
            if (sgn(left.D) == sgn(right.D))
                throw IndexUncertainError("unresolved cluster of zeros", p.offset + a.u, p.offset + b.u);
            int total = contribution;
            if (ul > a.u) total += rec(p, a, left);
            if (ur < b.u) total += rec(p, right, b);
            return total;
        }
        if (certified(a, b)) return 0;
        if (b.u - a.u < opt_.min_width)
            throw IndexUncertainError("index uncertain: interval not certified", p.offset + a.u, p.offset + b.u);
        Probe mid = probe(p, 0.5 * (a.u + b.u));
        return rec(p, a, mid) + rec(p, mid, b);
    }

    int n_;
    Eigen::Index N_;
    cplx omega_;
    bool real_;
    IndexOptions opt_;
    Mat J_, K_, I_;
    cplx phase_;
};

inline std::vector<double> uniform_grid(int k)
{
    std::vector<double> g(k + 1);
    for (int i = 0; i <= k; ++i) g[i] = double(i) / k;
    return g;
}

inline Mat random_symmetric(int N, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Mat B(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) B(i, j) = B(j, i) = U(rng);
    return B / op_norm(B);
}

/// Negative definite generator -I + B/2 with B random symmetric.  A definite
/// sign keeps the perturbation on the same side as the endpoint rotation
/// e^{-t eps J}, so the decaying tail never meets the singular set near a
/// degenerate endpoint.
inline Mat perturbation_generator(int N, std::uint64_t seed)
{
    return -Mat::Identity(N, N) + 0.5 * random_symmetric(N, seed);
}

/// Reference path from D(2)^{diamond n} to the identity.
inline Mat xi_value(int n, double u)
{
    double s = 2.0 - u;
    Mat M = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        M(i, i) = s;
        M(n + i, n + i) = 1.0 / s;
    }
    return M;
}

} // namespace detail

/// (i_omega(gamma), nu_omega(gamma)) by direct crossing count.
inline IndexPair index_nullity(const SymplecticPath& path, cplx omega, const IndexOptions& opt = {})
{
    if (std::abs(std::abs(omega) - 1.0) > 1e-12) throw InputError("omega must lie on the unit circle");
    using namespace detail;
    const int n = path.n();
    const Mat end = path.end_value();
    IndexPair out;
    out.omega = omega;
    out.nullity = nullity_omega(end, omega, opt.tol);
    out.degenerate_endpoint = out.nullity > 0;

    std::vector<Piece> main;
    {
        Piece xi;
        xi.f = [n](double u) { return xi_value(n, u); };
        xi.w = [](double u) { return u; };
        xi.grid = uniform_grid(opt.base_samples);
        xi.offset = 0.0;
        main.push_back(std::move(xi));
    }
    double off = 1.0;
    for (const auto& seg : path.segments()) {
        Piece p;
        double d = seg.duration();
        const Segment* sp = &seg;
        p.f = [sp, d](double u) { return sp->eval(u * d); };
        p.w = [](double) { return 1.0; };
        if (auto ts = seg.sample_times(); ts && ts->size() <= size_t(opt.max_sampled_grid)) {
            for (double t : *ts) p.grid.push_back(t / d);
            p.grid.back() = 1.0;
        } else {
            p.grid = uniform_grid(ts ? opt.max_sampled_grid : opt.base_samples);
        }
        p.offset = off;
        off += 1.0;
        main.push_back(std::move(p));
    }
    const Mat J = standard_J(n);
    auto tail = [&](double eps) {
        Piece t;
        t.f = [end, J, eps](double u) {
            const auto N = end.rows();
            return Mat(end * (std::cos(u * eps) * Mat::Identity(N, N) - std::sin(u * eps) * J));
        };
        t.w = [](double u) { return 1.0 - u; };
        t.grid = uniform_grid(opt.base_samples / 2);
        t.offset = off;
        return t;
    };

    std::string last;
    double la = 0, lb = 0;
    for (int attempt = 0; attempt < opt.attempts; ++attempt) {
        Mat B = perturbation_generator(2 * n, opt.seed + 7919ULL * attempt);
        CrossingCounter cc(n, omega, B, opt);
        try {
            int total = 0;
            for (const auto& p : main) total += cc.count(p);
            if (!out.degenerate_endpoint) {
                total += cc.count(tail(0.0));
            } else {
                int t1 = cc.count(tail(opt.eps));
                int t2 = cc.count(tail(0.5 * opt.eps));
                if (t1 != t2) throw IndexUncertainError("endpoint perturbation not stable in eps", off, off + 1);
                total += t1;
            }
            out.index = total;
            out.crossings = cc.crossings;
            out.crossing_log = std::move(cc.log);
            out.evaluations = cc.evaluations;
            return out;
        } catch (const IndexUncertainError& e) {
            last = e.what();
            la = e.a;
            lb = e.b;
        }
    }
    throw IndexUncertainError("index uncertain after all perturbations: " + last, la, lb);
}

inline std::vector<IndexPair> index_pair_sequence(const SymplecticPath& path, int m_max, cplx omega,
                                                  const IndexOptions& opt = {})
{
    if (m_max < 1) throw InputError("m_max must be positive");
    std::vector<IndexPair> out;
    for (int m = 1; m <= m_max; ++m) out.push_back(index_nullity(iterate_path(path, m), omega, opt));
    return out;
}

/// One-sided jumps i_{w exp(+-i eps)}(gamma) - i_w(gamma).  eps must be small
/// against the distance to other eigenvalues but large enough that |1 - e^{i eps}|^2
/// clears the rank tolerance near Jordan blocks.
inline std::pair<int, int> splitting_numbers_numeric(const SymplecticPath& path, cplx omega, double eps,
                                                     const IndexOptions& opt = {})
{
    if (!(eps > 0)) throw InputError("eps must be positive");
    int base = index_nullity(path, omega, opt).index;
    int plus = index_nullity(path, omega * std::polar(1.0, eps), opt).index;
    int minus = index_nullity(path, omega * std::polar(1.0, -eps), opt).index;
    return {plus - base, minus - base};
}

/// i(gamma, m) as the sum of i_w(gamma) over the m-th roots of unity.  Only
/// gamma itself is evaluated, so hyperbolic growth of gamma(tau)^m never
/// enters the determinants.  `cache` is keyed by the reduced fraction k/m and
/// uses i_{conj w} = i_w for real paths.
inline int iterated_index_by_roots(const SymplecticPath& path, int m, std::map<std::pair<int, int>, int>& cache,
                                   const IndexOptions& opt = {})
{
    if (m < 1) throw InputError("iteration count must be positive");
    int sum = 0;
    for (int k = 0; k < m; ++k) {
        int a = std::min(k, m - k) % m, b = m;
        int g = std::gcd(a, b);
        std::pair<int, int> key{a / g, b / g};
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, index_nullity(path, std::polar(1.0, two_pi * key.first / key.second), opt).index).first;
        sum += it->second;
    }
    return sum;
}

struct MeanIndexEstimate {
    double slope = 0;
    double half_width = 0; // bound on |slope - mean index|
    std::vector<std::pair<int, int>> samples; // (m, i(gamma, m))
};

/// Least-squares slope through the origin of m -> i(gamma, m) over the
/// dyadic iterates m = 1, 2, 4, ... and m_max.  Since |i(gamma,m) - m mean| <= n,
/// the error is at most n * sum(m) / sum(m^2).
inline MeanIndexEstimate mean_index_numeric(const SymplecticPath& path, int m_max, const IndexOptions& opt = {})
{
    if (m_max < 8) throw InputError("m_max must be at least 8");
    std::vector<int> ms;
    for (int m = 1; m < m_max; m *= 2) ms.push_back(m);
    ms.push_back(m_max);
    MeanIndexEstimate est;
    std::map<std::pair<int, int>, int> cache;
    double smi = 0, smm = 0, sm = 0;
    for (int m : ms) {
        int i = iterated_index_by_roots(path, m, cache, opt);
        est.samples.emplace_back(m, i);
        smi += double(m) * i;
        smm += double(m) * m;
        sm += m;
    }
    est.slope = smi / smm;
    est.half_width = path.n() * sm / smm;
    return est;
}

} // namespace maslov
