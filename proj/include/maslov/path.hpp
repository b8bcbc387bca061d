#pragma once
// Symplectic paths starting at the identity: exponential segments, sampled
// segments and closed-form segments, plus iteration.

#include "core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <memory>
#include <variant>

namespace maslov {

/// t -> exp(t J A) B on [0, duration].
struct ExpSegment {
    Mat A;
    Mat B;
    double duration = 1.0;
};

/// Piecewise linear interpolation of symplectic samples, projected back
/// onto Sp(2n) when the interpolant drifts.
struct SampledSegment {
    std::vector<double> times; // relative, starting at 0
    std::vector<Mat> values;
};

/// Closed-form segment on [0, duration].
struct FunctionSegment {
    std::function<Mat(double)> f;
    double duration = 1.0;
};

/// Nearest-symplectic correction M G^{-1/2} with G = -J M^T J M.
inline Mat symplectify(const Mat& M, const Mat& J)
{
    const auto N = M.rows();
    Mat G = -J * M.transpose() * J * M;
    // Newton-Schulz iteration for G^{-1/2}; G is close to I here.
    Mat X = Mat::Identity(N, N);
    for (int it = 0; it < 30; ++it) {
        Mat Xn = 0.5 * X * (3.0 * Mat::Identity(N, N) - G * X * X);
        double d = (Xn - X).cwiseAbs().maxCoeff();
        X = std::move(Xn);
        if (d < 1e-15) break;
    }
    return M * X;
}

class Segment {
public:
    using Body = std::variant<ExpSegment, SampledSegment, FunctionSegment>;

    explicit Segment(Body b, Mat right = Mat()) : body_(std::move(b)), right_(std::move(right)) { prepare(); }

    double duration() const
    {
        return std::visit(
            [](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, SampledSegment>)
                    return s.times.back();
                else
                    return s.duration;
            },
            body_);
    }

    /// Value at local time t in [0, duration].
    Mat eval(double t) const
    {
        Mat v = eval_base(t);
        if (right_.size() > 0) return v * right_;
        return v;
    }

    Segment right_multiplied(const Mat& R) const
    {
        Segment s = *this;
        s.right_ = right_.size() > 0 ? Mat(right_ * R) : R;
        return s;
    }

    const Body& body() const { return body_; }
    const Mat& right() const { return right_; }
    bool is_sampled() const { return std::holds_alternative<SampledSegment>(body_); }
    /// Natural sample times for sampled segments.
    const std::vector<double>* sample_times() const
    {
        if (auto p = std::get_if<SampledSegment>(&body_)) return &p->times;
        return nullptr;
    }

    double symplectic_tol = Tolerances{}.symplectic;

private:
    void prepare()
    {
        if (auto e = std::get_if<ExpSegment>(&body_)) {
            if (e->A.rows() != e->A.cols() || e->A.rows() % 2) throw InputError("generator must be square of even size");
            if ((e->A - e->A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, e->A.cwiseAbs().maxCoeff()))
                throw InputError("generator must be symmetric");
            if (!(e->duration > 0)) throw InputError("segment duration must be positive");
            J_ = standard_J(half_dim(e->A));
            JA_ = J_ * e->A;
            if (e->B.size() == 0) e->B = Mat::Identity(e->A.rows(), e->A.cols());
        } else if (auto s = std::get_if<SampledSegment>(&body_)) {
            if (s->times.size() < 2 || s->times.size() != s->values.size())
                throw InputError("sampled segment needs at least two samples and matching sizes");
            if (s->times.front() != 0.0) throw InputError("sample times must start at 0");
            for (size_t i = 1; i < s->times.size(); ++i)
                if (!(s->times[i] > s->times[i - 1])) throw InputError("sample times must be strictly increasing");
            J_ = standard_J(half_dim(s->values.front()));
        } else if (auto f = std::get_if<FunctionSegment>(&body_)) {
            if (!(f->duration > 0)) throw InputError("segment duration must be positive");
        }
    }

    Mat eval_base(double t) const
    {
        if (auto e = std::get_if<ExpSegment>(&body_)) {
            Mat X = t * JA_;
            return Mat(X.exp()) * e->B;
        }
        if (auto s = std::get_if<SampledSegment>(&body_)) {
            const auto& ts = s->times;
            if (t <= 0) return s->values.front();
            if (t >= ts.back()) return s->values.back();
            auto it = std::upper_bound(ts.begin(), ts.end(), t);
            size_t i = static_cast<size_t>(it - ts.begin()) - 1;
            double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
            if (w == 0.0) return s->values[i];
            Mat M = (1.0 - w) * s->values[i] + w * s->values[i + 1];
            double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
            if ((M.transpose() * J_ * M - J_).cwiseAbs().maxCoeff() > symplectic_tol * scale * scale)
                M = symplectify(M, J_);
            return M;
        }
        return std::get<FunctionSegment>(body_).f(t);
    }

    Body body_;
    Mat right_;
    Mat J_, JA_;
};

/// A continuous path [0, tau] -> Sp(2n) with value I at 0.
class SymplecticPath {
public:
    SymplecticPath() = default;
    explicit SymplecticPath(int n) : n_(n) {}

    int n() const { return n_; }
    double tau() const { return tau_; }
    const std::vector<Segment>& segments() const { return segs_; }

    /// Append an exponential segment whose base point is the current endpoint.
    SymplecticPath& add_exp(const Mat& A, double duration)
    {
        ExpSegment e{A, end_value(), duration};
        return add(Segment(e));
    }
    SymplecticPath& add_samples(std::vector<double> times, std::vector<Mat> values)
    {
        return add(Segment(SampledSegment{std::move(times), std::move(values)}));
    }
    SymplecticPath& add_function(std::function<Mat(double)> f, double duration)
    {
        return add(Segment(FunctionSegment{std::move(f), duration}));
    }

    SymplecticPath& add(Segment s)
    {
        Mat start = s.eval(0.0);
        if (half_dim(start) != n_) throw InputError("segment dimension does not match path");
        Mat expected = end_value();
        double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
        if ((start - expected).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw InputError("segment is not continuous at the joint");
        tau_ += s.duration();
        starts_.push_back(tau_ - s.duration());
        segs_.push_back(std::move(s));
        end_ = segs_.back().eval(segs_.back().duration());
        return *this;
    }

    Mat end_value() const
    {
        if (segs_.empty()) return Mat::Identity(2 * n_, 2 * n_);
        return end_;
    }

    Mat evaluate(double t) const
    {
        if (t < 0 || t > tau_ * (1 + 1e-14)) throw InputError("evaluation time outside [0, tau]");
        if (segs_.empty()) return Mat::Identity(2 * n_, 2 * n_);
        auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
        size_t i = it == starts_.begin() ? 0 : static_cast<size_t>(it - starts_.begin()) - 1;
        double local = std::min(t - starts_[i], segs_[i].duration());
        return segs_[i].eval(local);
    }

    double segment_start(size_t i) const { return starts_[i]; }

private:
    int n_ = 1;
    double tau_ = 0.0;
    std::vector<Segment> segs_;
    std::vector<double> starts_;
    Mat end_;
};

/// m-th iterate: gamma^m(t) = gamma(t - j tau) gamma(tau)^j on [j tau, (j+1) tau].
inline SymplecticPath iterate_path(const SymplecticPath& g, int m)
{
    if (m < 1) throw InputError("iterate count must be positive");
    SymplecticPath out(g.n());
    Mat end = g.end_value();
    Mat P = Mat::Identity(2 * g.n(), 2 * g.n());
    for (int j = 0; j < m; ++j) {
        for (const auto& s : g.segments()) out.add(j == 0 ? s : s.right_multiplied(P));
        P = P * end;
    }
    return out;
}

} // namespace maslov
