#pragma once
// Symplectic linear algebra: structure matrix, diamond products, basic
// normal forms and spectral analysis on the unit circle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace maslov {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotSymplecticError : Error {
    using Error::Error;
};
struct ClassificationError : Error {
    using Error::Error;
};
struct InputError : Error {
    using Error::Error;
};

struct Tolerances {
    double symplectic = 1e-9;
    double eigen = 1e-7;   // |lambda| = 1 test
    double rank = 1e-8;    // relative to the norm of M
    double cluster = 1e-4; // eigenvalue clustering radius
    double det = 1e-8;
};

inline Mat standard_J(int n)
{
    if (n < 1) throw InputError("standard_J: n must be positive");
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = -Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return J;
}

inline int half_dim(const Mat& M)
{
    if (M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0)
        throw InputError("matrix must be square of even positive size");
    return static_cast<int>(M.rows() / 2);
}

inline double symplectic_defect(const Mat& M)
{
    Mat J = standard_J(half_dim(M));
    return (M.transpose() * J * M - J).cwiseAbs().maxCoeff();
}

/// A 2n x 2n real matrix checked to satisfy M^T J M = J.
class SympMatrix {
public:
    SympMatrix() = default;
    explicit SympMatrix(Mat m, double tol = Tolerances{}.symplectic) : m_(std::move(m))
    {
        int n = half_dim(m_);
        double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        double d = symplectic_defect(m_);
        if (d > tol * scale * scale) {
            std::ostringstream os;
            os << "matrix is not symplectic: defect " << d;
            throw NotSymplecticError(os.str());
        }
        double det = m_.determinant();
        if (std::abs(det - 1.0) > 1e-8 * std::pow(scale, 2 * n))
            throw NotSymplecticError("determinant differs from 1");
    }
    static SympMatrix unchecked(Mat m)
    {
        SympMatrix s;
        s.m_ = std::move(m);
        return s;
    }
    static SympMatrix identity(int n) { return unchecked(Mat::Identity(2 * n, 2 * n)); }

    int n() const { return static_cast<int>(m_.rows() / 2); }
    const Mat& mat() const { return m_; }
    operator const Mat&() const { return m_; }

    SympMatrix operator*(const SympMatrix& o) const { return unchecked(m_ * o.m_); }
    SympMatrix pow(int k) const
    {
        Mat r = Mat::Identity(m_.rows(), m_.cols());
        Mat b = m_;
        for (int e = k; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            b = b * b;
        }
        return unchecked(r);
    }
    /// Symplectic inverse -J M^T J.
    SympMatrix inverse() const
    {
        Mat J = standard_J(n());
        return unchecked(-J * m_.transpose() * J);
    }

private:
    Mat m_;
};

/// Block-interleaving direct sum: the first factor occupies coordinates
/// (x_1..x_n1, y_1..y_n1) and the second the remaining ones.
inline Mat diamond(const Mat& M1, const Mat& M2)
{
    int n1 = half_dim(M1), n2 = half_dim(M2);
    int n = n1 + n2;
    Mat R = Mat::Zero(2 * n, 2 * n);
    auto place = [&](const Mat& M, int k, int off) {
        for (int bi = 0; bi < 2; ++bi)
            for (int bj = 0; bj < 2; ++bj)
                R.block(bi * n + off, bj * n + off, k, k) = M.block(bi * k, bj * k, k, k);
    };
    place(M1, n1, 0);
    place(M2, n2, n1);
    return R;
}

inline SympMatrix diamond(const SympMatrix& a, const SympMatrix& b)
{
    return SympMatrix::unchecked(diamond(a.mat(), b.mat()));
}

inline Mat diamond_all(const std::vector<Mat>& blocks)
{
    if (blocks.empty()) throw InputError("diamond of an empty list");
    Mat r = blocks.front();
    for (size_t i = 1; i < blocks.size(); ++i) r = diamond(r, blocks[i]);
    return r;
}

// ---------------------------------------------------------------------------
// Basic normal forms

inline Mat nf_D(double lambda)
{
    Mat M(2, 2);
    M << lambda, 0, 0, 1.0 / lambda;
    return M;
}

inline Mat nf_N1(double lambda, double b)
{
    Mat M(2, 2);
    M << lambda, b, 0, lambda;
    return M;
}

inline Mat nf_R(double theta)
{
    Mat M(2, 2);
    M << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return M;
}

/// Four-dimensional block [[R, b], [0, R]] in (x1, x2, y1, y2) ordering.
/// b = [[b1, b2], [b3, b4]] must make b^T R symmetric.
inline Mat nf_N2_raw(double theta, const Eigen::Matrix2d& b)
{
    Mat M = Mat::Zero(4, 4);
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    M.block(0, 0, 2, 2) = R;
    M.block(2, 2, 2, 2) = R;
    M.block(0, 2, 2, 2) = b;
    return M;
}

/// N2 block with given b2, b3; b1 and b4 are chosen to satisfy the symmetry
/// constraint (b3 - b2) cos = (b1 + b4) sin with b1 = b4.
inline Eigen::Matrix2d n2_coupling(double theta, double b2, double b3)
{
    double s = std::sin(theta), c = std::cos(theta);
    double b1 = 0.5 * (b3 - b2) * c / s;
    Eigen::Matrix2d b;
    b << b1, b2, b3, b1;
    return b;
}

inline Mat nf_N2(double theta, double b2, double b3) { return nf_N2_raw(theta, n2_coupling(theta, b2, b3)); }

inline bool n2_trivial(double theta, double b2, double b3) { return (b2 - b3) * std::sin(theta) > 0; }

enum class BlockKind { D, N1, R, N2 };

struct BasicNormalForm {
    BlockKind kind = BlockKind::R;
    double lambda = 1.0; // D, N1
    double b = 0.0;      // N1
    double theta = 0.0;  // R, N2
    double b2 = 0.0, b3 = 0.0;

    int n() const { return kind == BlockKind::N2 ? 2 : 1; }
    bool trivial() const { return kind == BlockKind::N2 && n2_trivial(theta, b2, b3); }

    void validate() const
    {
        auto bad_angle = [](double t) {
            return !(t > 0 && t < two_pi) || std::abs(t - pi) < 1e-12;
        };
        switch (kind) {
        case BlockKind::D:
            if (lambda != 2.0 && lambda != -2.0) throw InputError("D block needs lambda = +-2");
            break;
        case BlockKind::N1:
            if (lambda != 1.0 && lambda != -1.0) throw InputError("N1 block needs lambda = +-1");
            if (b != -1.0 && b != 0.0 && b != 1.0) throw InputError("N1 block needs b in {-1,0,1}");
            break;
        case BlockKind::R:
            if (bad_angle(theta)) throw InputError("R block angle must lie in (0,pi) or (pi,2pi)");
            break;
        case BlockKind::N2:
            if (bad_angle(theta)) throw InputError("N2 block angle must lie in (0,pi) or (pi,2pi)");
            if (b2 == b3) throw InputError("N2 block needs b2 != b3");
            break;
        }
    }

    Mat matrix() const
    {
        validate();
        switch (kind) {
        case BlockKind::D: return nf_D(lambda);
        case BlockKind::N1: return nf_N1(lambda, b);
        case BlockKind::R: return nf_R(theta);
        case BlockKind::N2: return nf_N2(theta, b2, b3);
        }
        return {};
    }

    std::string label() const
    {
        std::ostringstream os;
        switch (kind) {
        case BlockKind::D: os << "D(" << lambda << ")"; break;
        case BlockKind::N1: os << "N1(" << lambda << "," << b << ")"; break;
        case BlockKind::R: os << "R(" << theta << ")"; break;
        case BlockKind::N2: os << "N2(" << theta << "," << b2 << "," << b3 << (trivial() ? ",trivial)" : ",nontrivial)"); break;
        }
        return os.str();
    }

    static BasicNormalForm D(double l) { return {BlockKind::D, l}; }
    static BasicNormalForm N1(double l, double b) { return {BlockKind::N1, l, b}; }
    static BasicNormalForm R(double t) { return {BlockKind::R, 1.0, 0.0, t}; }
    static BasicNormalForm N2(double t, double b2, double b3) { return {BlockKind::N2, 1.0, 0.0, t, b2, b3}; }
};

inline Mat diamond_of(const std::vector<BasicNormalForm>& blocks)
{
    std::vector<Mat> ms;
    for (const auto& b : blocks) ms.push_back(b.matrix());
    return diamond_all(ms);
}

// ---------------------------------------------------------------------------
// Spectral tools

inline double op_norm(const Mat& M)
{
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

/// Complex kernel dimension of M - omega I at tolerance rank_tol * max(1, |M|).
inline int nullity_omega(const Mat& M, cplx omega, const Tolerances& tol = {})
{
    const auto N = M.rows();
    CMat X = M.cast<cplx>() - omega * CMat::Identity(N, N);
    Eigen::JacobiSVD<CMat> svd(X);
    double thr = tol.rank * std::max(1.0, op_norm(M));
    int k = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) <= thr) ++k;
    return k;
}

/// (-1)^(n-1) conj(omega)^n det(M - omega I), which is real for symplectic M.
inline double D_omega(const Mat& M, cplx omega)
{
    int n = half_dim(M);
    const auto N = M.rows();
    cplx det;
    if (std::abs(omega.imag()) == 0.0) {
        det = (M - omega.real() * Mat::Identity(N, N)).partialPivLu().determinant();
    } else {
        det = (M.cast<cplx>() - omega * CMat::Identity(N, N)).partialPivLu().determinant();
    }
    cplx v = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(std::conj(omega), n) * det;
    double scale = std::abs(v) + 1.0;
    if (std::abs(v.imag()) > 1e-10 * scale)
        throw Error("D_omega: imaginary residue too large; matrix may not be symplectic");
    return v.real();
}

struct EigenCluster {
    cplx center;
    int alg_mult = 0;
    double spread = 0.0;
    std::vector<cplx> members;
};

/// Single-linkage clustering of eigenvalues with the given radius.
inline std::vector<EigenCluster> cluster_eigenvalues(const Mat& M, double radius)
{
    Eigen::EigenSolver<Mat> es(M, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    const size_t N = ev.size();
    std::vector<int> label(N);
    for (size_t i = 0; i < N; ++i) label[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) { return label[i] == i ? i : label[i] = find(label[i]); };
    for (size_t i = 0; i < N; ++i)
        for (size_t j = i + 1; j < N; ++j)
            if (std::abs(ev[i] - ev[j]) <= radius * std::max(1.0, std::abs(ev[i]))) label[find(int(i))] = find(int(j));
    std::vector<EigenCluster> out;
    std::vector<int> root_to_idx(N, -1);
    for (size_t i = 0; i < N; ++i) {
        int r = find(int(i));
        if (root_to_idx[r] < 0) {
            root_to_idx[r] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[root_to_idx[r]].members.push_back(ev[i]);
    }
    for (auto& c : out) {
        cplx s = 0;
        for (auto z : c.members) s += z;
        c.center = s / double(c.members.size());
        c.alg_mult = static_cast<int>(c.members.size());
        for (auto z : c.members) c.spread = std::max(c.spread, std::abs(z - c.center));
    }
    std::sort(out.begin(), out.end(), [](const EigenCluster& a, const EigenCluster& b) {
        if (a.center.real() != b.center.real()) return a.center.real() < b.center.real();
        return a.center.imag() < b.center.imag();
    });
    return out;
}

inline bool on_unit_circle(cplx z, const Tolerances& tol) { return std::abs(std::abs(z) - 1.0) <= tol.eigen; }

/// Snap a cluster center on the unit circle: exact +-1 for real clusters.
inline cplx snap_unit(cplx c)
{
    if (std::abs(c.imag()) < 1e-6 && std::abs(std::abs(c.real()) - 1.0) < 1e-3) return c.real() > 0 ? 1.0 : -1.0;
    return c / std::abs(c);
}

struct UnitEigen {
    cplx omega;
    int alg_mult = 0;
    int geo_mult = 0;
};

struct UnitSpectrum {
    std::vector<UnitEigen> entries;
    int total_e = 0;
    bool ill_conditioned = false;
    double confidence_radius = 0.0;
    std::vector<cplx> off_circle; // remaining multipliers
};

inline UnitSpectrum unit_spectrum(const Mat& M, const Tolerances& tol = {})
{
    UnitSpectrum us;
    auto clusters = cluster_eigenvalues(M, tol.cluster);
    for (const auto& c : clusters) {
        double dist = std::abs(std::abs(c.center) - 1.0);
        if (dist <= tol.eigen) {
            UnitEigen e;
            e.omega = snap_unit(c.center);
            e.alg_mult = c.alg_mult;
            e.geo_mult = nullity_omega(M, e.omega, tol);
            us.entries.push_back(e);
            us.total_e += c.alg_mult;
            us.confidence_radius = std::max(us.confidence_radius, c.spread);
            if (e.geo_mult > e.alg_mult || e.geo_mult == 0) us.ill_conditioned = true;
        } else {
            if (dist <= std::sqrt(tol.eigen)) us.ill_conditioned = true;
            for (auto z : c.members) us.off_circle.push_back(z);
        }
    }
    if (us.total_e % 2 != 0) us.ill_conditioned = true;
    return us;
}

/// Orthonormal basis (columns) of the k-dimensional near-kernel of X, taken
/// from the k smallest singular directions.
inline CMat near_kernel(const CMat& X, int k)
{
    Eigen::JacobiSVD<CMat> svd(X, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(k);
}

inline std::vector<double> singular_values_ascending(const CMat& X)
{
    Eigen::JacobiSVD<CMat> svd(X);
    std::vector<double> s(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace maslov
