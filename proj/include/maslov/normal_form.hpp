#pragma once
// Normal-form data of a symplectic matrix, closed-form iteration of the
// index and nullity, and splitting numbers.

#include "core.hpp"

#include <map>
#include <optional>

namespace maslov {

struct FloorCeil {
    long long floor = 0;
    long long ceil = 0;
    int phi = 0;
};

/// [a], E(a) and phi(a) = E(a) - [a]. Inputs within 1e-12 of an integer are
/// treated as that integer.
inline FloorCeil floor_ceil_phi(double a)
{
    double r = std::round(a);
    if (std::abs(a - r) <= 1e-12 * std::max(1.0, std::abs(a))) {
        auto k = static_cast<long long>(r);
        return {k, k, 0};
    }
    auto f = static_cast<long long>(std::floor(a));
    return {f, f + 1, 1};
}

struct NormalFormDecomposition {
    int n = 0;
    int p_minus = 0, p_zero = 0, p_plus = 0;
    int q_minus = 0, q_zero = 0, q_plus = 0;
    int r = 0, r_star = 0, r_zero = 0;
    std::vector<double> thetas; // R blocks
    std::vector<double> alphas; // non-trivial N2 blocks
    std::vector<double> betas;  // trivial N2 blocks
    int hyperbolic_dim = 0;
    int negative_real_pairs = 0; // real negative multipliers off U, counted in pairs

    int e() const
    {
        return 2 * (p_minus + p_zero + p_plus + q_minus + q_zero + q_plus) + 2 * r + 4 * r_star + 4 * r_zero;
    }

    void validate() const
    {
        if (e() + hyperbolic_dim != 2 * n) throw Error("decomposition dimensions do not add up");
        if (static_cast<int>(thetas.size()) != r || static_cast<int>(alphas.size()) != r_star ||
            static_cast<int>(betas.size()) != r_zero)
            throw Error("decomposition angle lists do not match counts");
    }

    /// Parity that i(gamma, 1) must have for a path ending in this class.
    int index_parity() const
    {
        return (p_minus + p_zero + q_minus + q_zero + q_plus + r + negative_real_pairs) % 2;
    }

    bool operator==(const NormalFormDecomposition&) const = default;
};

namespace detail {

inline double angle_in_range(double t)
{
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

/// Orthonormal basis of the k-dimensional near-kernel, with a check that
/// the singular value gap separates it from the rest.
template <class MatT>
MatT generalized_eigenspace(const MatT& X2, int k, double thr, const std::string& what)
{
    Eigen::JacobiSVD<MatT> svd(X2, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const auto N = s.size();
    double inside = s(N - k);
    double outside = k < N ? s(N - k - 1) : std::numeric_limits<double>::infinity();
    if (!(inside <= thr && outside > thr))
        throw ClassificationError("cannot separate the generalized eigenspace at " + what +
                                  " (singular values " + std::to_string(inside) + ", " + std::to_string(outside) +
                                  ")");
    return svd.matrixV().rightCols(k);
}

struct SignatureCount {
    int pos = 0, neg = 0, zero = 0;
};

inline SignatureCount signature(const CMat& H, double thr)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (H + H.adjoint()));
    SignatureCount c;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double v = es.eigenvalues()(i);
        if (v > thr)
            ++c.pos;
        else if (v < -thr)
            ++c.neg;
        else
            ++c.zero;
    }
    return c;
}

inline std::string fmt_cplx(cplx z)
{
    std::ostringstream os;
    os.precision(10);
    os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

} // namespace detail

/// Normal-form data of M read off the eigenstructure.
///
/// Eigenvalue +-1: on the generalized eigenspace E the quadratic form
/// x -> x^T J (M -+ I) x has one positive direction per N1(+-1, 1) block and
/// one negative direction per N1(+-1, -1) block.
/// Other unit eigenvalues w with Im w > 0: the Krein form -i v^* J v counts
/// rotation blocks R(arg w) (positive) and R(2 pi - arg w) (negative); each
/// Jordan chain contributes one of each. A positive direction of the
/// Hermitian form conj(w) v^* J (M - w I) v marks a non-trivial N2 block.
inline NormalFormDecomposition decompose(const Mat& M, const Tolerances& tol = {})
{
    using namespace detail;
    const int n = half_dim(M);
    const auto N = M.rows();
    if (symplectic_defect(M) > tol.symplectic * std::max(1.0, M.cwiseAbs().maxCoeff() * M.cwiseAbs().maxCoeff()))
        throw NotSymplecticError("decompose: matrix is not symplectic");
    const Mat J = standard_J(n);
    const double scale = std::max(1.0, op_norm(M));
    const double kernel_thr = 1e-6 * scale * scale;
    const double form_thr = 1e-6 * scale;

    NormalFormDecomposition d;
    d.n = n;
    auto clusters = cluster_eigenvalues(M, tol.cluster);
    int off_dim = 0;
    for (const auto& c : clusters) {
        double radial = std::abs(std::abs(c.center) - 1.0);
        if (radial > tol.eigen) {
            if (radial <= std::sqrt(tol.eigen) && c.spread < tol.cluster)
                throw ClassificationError("eigenvalue cluster " + fmt_cplx(c.center) +
                                          " is too close to the unit circle to classify");
            off_dim += c.alg_mult;
            if (std::abs(c.center.imag()) <= 1e-9 * std::abs(c.center) && c.center.real() < 0) d.negative_real_pairs += c.alg_mult;
            continue;
        }
        const cplx w = snap_unit(c.center);
        const int k = c.alg_mult;
        const bool real_w = w.imag() == 0.0;
        if (real_w) {
            const double s = w.real();
            if (k % 2) throw ClassificationError("odd multiplicity at eigenvalue " + fmt_cplx(w));
            Mat X = M - s * Mat::Identity(N, N);
            Mat V = generalized_eigenspace<Mat>(X * X, k, kernel_thr, fmt_cplx(w));
            Mat S = V.transpose() * J * X * V;
            auto sig = signature(S.cast<cplx>(), form_thr);
            int plus_one_blocks = sig.pos, minus_one_blocks = sig.neg;
            int identity_blocks = k / 2 - plus_one_blocks - minus_one_blocks;
            int geo = nullity_omega(M, w, tol);
            if (identity_blocks < 0 || geo != k - plus_one_blocks - minus_one_blocks)
                throw ClassificationError("Jordan structure at eigenvalue " + fmt_cplx(w) +
                                          " is not a product of basic normal forms");
            if (s > 0) {
                d.p_minus += plus_one_blocks;
                d.p_plus += minus_one_blocks;
                d.p_zero += identity_blocks;
            } else {
                d.q_minus += plus_one_blocks;
                d.q_plus += minus_one_blocks;
                d.q_zero += identity_blocks;
            }
            continue;
        }
        if (w.imag() < 0) continue; // handled with its conjugate
        const double arg = std::arg(w);
        if (arg < 1e-9 || arg > pi - 1e-9)
            throw ClassificationError("unit eigenvalue " + fmt_cplx(w) + " is too close to +-1");
        CMat X = M.cast<cplx>() - w * CMat::Identity(N, N);
        CMat V = generalized_eigenspace<CMat>(X * X, k, kernel_thr, fmt_cplx(w));
        CMat Jc = J.cast<cplx>();
        auto krein = signature(cplx(0, -1) * V.adjoint() * Jc * V, form_thr);
        int geo = nullity_omega(M, w, tol);
        int chains = k - geo;
        if (krein.zero != 0 || krein.pos < chains || krein.neg < chains || chains < 0)
            throw ClassificationError("Krein form at eigenvalue " + fmt_cplx(w) + " is degenerate");
        for (int i = 0; i < krein.pos - chains; ++i) d.thetas.push_back(arg);
        for (int i = 0; i < krein.neg - chains; ++i) d.thetas.push_back(two_pi - arg);
        if (chains > 0) {
            auto jordan = signature(std::conj(w) * V.adjoint() * Jc * X * V, form_thr);
            if (jordan.pos + jordan.neg != chains)
                throw ClassificationError("Jordan chains at eigenvalue " + fmt_cplx(w) +
                                          " are not resolved at tolerance");
            for (int i = 0; i < jordan.pos; ++i) d.alphas.push_back(arg);
            for (int i = 0; i < jordan.neg; ++i) d.betas.push_back(arg);
        }
    }
    if (off_dim % 2 || d.negative_real_pairs % 2) throw ClassificationError("off-circle spectrum has odd dimension");
    d.negative_real_pairs /= 2;
    std::sort(d.thetas.begin(), d.thetas.end());
    std::sort(d.alphas.begin(), d.alphas.end());
    std::sort(d.betas.begin(), d.betas.end());
    d.r = static_cast<int>(d.thetas.size());
    d.r_star = static_cast<int>(d.alphas.size());
    d.r_zero = static_cast<int>(d.betas.size());
    d.hyperbolic_dim = off_dim;
    d.validate();
    return d;
}

inline void check_parity(const NormalFormDecomposition& d, int i1)
{
    if (((i1 % 2) + 2) % 2 != d.index_parity())
        throw InputError("i(gamma,1) = " + std::to_string(i1) + " has the wrong parity for this endpoint");
}

/// i(gamma, m) from i(gamma, 1) and the normal-form data of gamma(tau).
inline long long iteration_index(const NormalFormDecomposition& d, int i1, int m)
{
    if (m < 1) throw InputError("iteration count must be positive");
    check_parity(d, i1);
    long long v = static_cast<long long>(m) * (i1 + d.p_minus + d.p_zero - d.r);
    for (double t : d.thetas) v += 2 * floor_ceil_phi(m * t / two_pi).ceil;
    v -= d.r + d.p_minus + d.p_zero;
    if (m % 2 == 0) v -= d.q_zero + d.q_plus;
    long long phis = 0;
    for (double a : d.alphas) phis += floor_ceil_phi(m * a / two_pi).phi;
    v += 2 * (phis - d.r_star);
    return v;
}

inline int iteration_nullity(const NormalFormDecomposition& d, int nu1, int m)
{
    if (m < 1) throw InputError("iteration count must be positive");
    int v = nu1 + 2 * (d.r + d.r_star + d.r_zero);
    if (m % 2 == 0) v += d.q_minus + 2 * d.q_zero + d.q_plus;
    int phis = 0;
    for (double t : d.thetas) phis += floor_ceil_phi(m * t / two_pi).phi;
    for (double a : d.alphas) phis += floor_ceil_phi(m * a / two_pi).phi;
    for (double b : d.betas) phis += floor_ceil_phi(m * b / two_pi).phi;
    return v - 2 * phis;
}

inline double mean_index(const NormalFormDecomposition& d, int i1)
{
    double v = i1 + d.p_minus + d.p_zero - d.r;
    for (double t : d.thetas) v += t / pi;
    return v;
}

// ---------------------------------------------------------------------------
// Splitting numbers

struct SplittingPair {
    int s_plus = 0;
    int s_minus = 0;
    cplx omega = 1.0;
};

/// Where a per-block splitting value came from.
enum class SplitSource { ClosedForm, FrozenNumeric, OffSpectrum };

inline const char* to_string(SplitSource s)
{
    switch (s) {
    case SplitSource::ClosedForm: return "closed-form";
    case SplitSource::FrozenNumeric: return "frozen-numeric";
    case SplitSource::OffSpectrum: return "off-spectrum";
    }
    return "?";
}

struct SplitContribution {
    std::string block;
    int s_plus = 0, s_minus = 0;
    SplitSource source = SplitSource::OffSpectrum;
};

/// Per-block splitting numbers. Only the N1(1, a) row at w = 1 is a closed
/// formula; every other row was computed once with the crossing engine at
/// w exp(+-i eps) for eps = 1e-3 and 5e-4 and frozen here.
namespace split_table {
inline constexpr int version = 1;
// N1(1, a) at 1: S+ = S- = 1 if a >= 0, else 0.
inline constexpr int n1_plus_one[3] = {0, 1, 1}; // a = -1, 0, 1
// N1(-1, a) at -1.
inline constexpr int n1_minus_one[3] = {1, 1, 0}; // a = -1, 0, 1
// R(theta) at exp(i theta), either half of the circle; swapped at exp(-i theta).
inline constexpr int r_at_own[2] = {0, 1};
// N2 at either eigenvalue: non-trivial and trivial.
inline constexpr int n2_nontriv[2] = {1, 1};
inline constexpr int n2_triv[2] = {0, 0};
} // namespace split_table

inline bool same_unit(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

/// Splitting numbers of M at w, summed over its normal-form blocks.
inline SplittingPair splitting_numbers(const NormalFormDecomposition& d, cplx omega,
                                       std::vector<SplitContribution>* trace = nullptr, double angle_tol = 1e-6)
{
    if (std::abs(std::abs(omega) - 1.0) > 1e-12) throw InputError("omega must lie on the unit circle");
    SplittingPair sp;
    sp.omega = omega;
    auto add = [&](const std::string& label, int sp_, int sm_, SplitSource src, int count) {
        if (count <= 0) return;
        sp.s_plus += sp_ * count;
        sp.s_minus += sm_ * count;
        if (trace) trace->push_back({label + (count > 1 ? " x" + std::to_string(count) : ""), sp_, sm_, src});
    };
    using namespace split_table;
    if (same_unit(omega, 1.0, angle_tol)) {
        add("N1(1,1)", n1_plus_one[2], n1_plus_one[2], SplitSource::ClosedForm, d.p_minus);
        add("I2", n1_plus_one[1], n1_plus_one[1], SplitSource::ClosedForm, d.p_zero);
        add("N1(1,-1)", n1_plus_one[0], n1_plus_one[0], SplitSource::ClosedForm, d.p_plus);
    }
    if (same_unit(omega, -1.0, angle_tol)) {
        add("N1(-1,1)", n1_minus_one[2], n1_minus_one[2], SplitSource::FrozenNumeric, d.q_minus);
        add("-I2", n1_minus_one[1], n1_minus_one[1], SplitSource::FrozenNumeric, d.q_zero);
        add("N1(-1,-1)", n1_minus_one[0], n1_minus_one[0], SplitSource::FrozenNumeric, d.q_plus);
    }
    for (double t : d.thetas) {
        cplx own = std::polar(1.0, t);
        std::string label = "R(" + std::to_string(t) + ")";
        if (same_unit(omega, own, angle_tol))
            add(label, r_at_own[0], r_at_own[1], SplitSource::FrozenNumeric, 1);
        else if (same_unit(omega, std::conj(own), angle_tol))
            add(label, r_at_own[1], r_at_own[0], SplitSource::FrozenNumeric, 1);
    }
    auto n2 = [&](const std::vector<double>& angles, const int* v, const char* what) {
        for (double a : angles) {
            cplx w = std::polar(1.0, a);
            if (same_unit(omega, w, angle_tol) || same_unit(omega, std::conj(w), angle_tol))
                add(std::string("N2(") + std::to_string(a) + "," + what + ")", v[0], v[1],
                    SplitSource::FrozenNumeric, 1);
        }
    };
    n2(d.alphas, n2_nontriv, "nontrivial");
    n2(d.betas, n2_triv, "trivial");
    return sp;
}

inline SplittingPair splitting_numbers(const Mat& M, cplx omega, std::vector<SplitContribution>* trace = nullptr,
                                       const Tolerances& tol = {})
{
    return splitting_numbers(decompose(M, tol), omega, trace);
}

/// For M = N1(1,1) <> M' returns 2 S+(1) - nu_1(M) after checking it equals
/// 1 + p_-(M') - p_+(M').
inline int splitting_identity_check(const Mat& M, const Tolerances& tol = {})
{
    auto d = decompose(M, tol);
    if (d.p_minus < 1) throw InputError("matrix is not of the form N1(1,1) <> M'");
    int nu = nullity_omega(M, 1.0, tol);
    int lhs = 2 * splitting_numbers(d, 1.0).s_plus - nu;
    int rhs = 1 + (d.p_minus - 1) - d.p_plus;
    if (lhs != rhs)
        throw Error("splitting identity fails: " + std::to_string(lhs) + " != " + std::to_string(rhs));
    return lhs;
}

} // namespace maslov
