#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace anc {

/// Most recent samples of a stream, addressable newest-first as contiguous
/// spans. Samples before the first push read as zero.
class SampleHistory {
public:
    explicit SampleHistory(std::size_t capacity);

    void push(double value) noexcept;
    void clear() noexcept;

    /// x(n - lag); lag must be < capacity().
    double at(std::size_t lag) const noexcept { return buf_[pos_ + lag]; }

    /// [x(n - offset), x(n - offset - 1), ..., x(n - offset - count + 1)].
    std::span<const double> view(std::size_t offset, std::size_t count) const noexcept {
        return {buf_.data() + pos_ + offset, count};
    }

    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::size_t capacity_;
    std::size_t pos_ = 0;
    std::vector<double> buf_;  // every sample is stored twice, at pos_ and pos_ + capacity_
};

struct StepOutput {
    double y = 0.0;  // filter output
    double e = 0.0;  // d - y
};

/// y = sum_k h[k] * x[k] where x is a newest-first regressor.
double predict(std::span<const double> h, std::span<const double> x) noexcept;

bool all_finite(std::span<const double> h) noexcept;

// Single-step update rules. Each one updates `h` in place and returns the
// a priori output and error.

StepOutput lms_step(std::span<double> h, std::span<const double> x, double d, double mu);

/// h += mu e x / (delta + |x|^2); a zero-norm regressor with delta == 0
/// leaves h unchanged.
StepOutput nlms_step(std::span<double> h, std::span<const double> x, double d, double mu, double delta);

/// K x M block of regressors (row i is the regressor at time n - i) and the
/// matching desired samples.
struct ApBlock {
    Eigen::MatrixXd X;
    Eigen::VectorXd d;
};

struct ApStepOutput {
    Eigen::VectorXd y;
    Eigen::VectorXd e;
    bool factorized = true;  // false: eps*I + X X^T was not positive definite, h untouched
};

ApStepOutput ap_step(std::span<double> h, const ApBlock& block, double mu, double eps);

struct RlsState {
    Eigen::MatrixXd inverse_correlation;  // C^{-1}(n)
    double lambda = 0.99;
    double delta_init = 1e3;
};

/// inverse_correlation = delta_init * I. Throws ConfigError unless
/// 0 < lambda <= 1 and delta_init > 0.
RlsState rls_init(std::size_t taps, double lambda, double delta_init);

/// Exponentially weighted RLS in inverse form. The correlation estimate
/// C(n) = lambda C(n-1) + x x^T is carried as its inverse through the
/// rank-one update identity and symmetrized after every step.
StepOutput rls_step(std::span<double> h, RlsState& state, std::span<const double> x, double d);

// ---------------------------------------------------------------------------
// Per-sample streaming filters

class AdaptiveFilter {
public:
    virtual ~AdaptiveFilter() = default;

    /// Consumes input x(n) and desired d(n). Throws DivergenceError if a
    /// coefficient becomes non-finite.
    StepOutput step(double x, double d);

    virtual std::span<const double> coefficients() const noexcept = 0;
    virtual std::string_view name() const noexcept = 0;

    std::size_t samples_processed() const noexcept { return processed_; }

protected:
    virtual StepOutput do_step(double x, double d) = 0;

private:
    std::size_t processed_ = 0;
};

class LmsFilter final : public AdaptiveFilter {
public:
    LmsFilter(std::size_t taps, double mu);

    std::span<const double> coefficients() const noexcept override { return h_; }
    std::string_view name() const noexcept override { return "LMS"; }

private:
    StepOutput do_step(double x, double d) override;

    double mu_;
    std::vector<double> h_;
    SampleHistory x_;
};

class NlmsFilter final : public AdaptiveFilter {
public:
    NlmsFilter(std::size_t taps, double mu, double delta);

    std::span<const double> coefficients() const noexcept override { return h_; }
    std::string_view name() const noexcept override { return "NLMS"; }

private:
    StepOutput do_step(double x, double d) override;

    double mu_;
    double delta_;
    std::vector<double> h_;
    SampleHistory x_;
};

class ApFilter final : public AdaptiveFilter {
public:
    ApFilter(std::size_t taps, std::size_t order, double mu, double eps);

    std::span<const double> coefficients() const noexcept override { return h_; }
    std::string_view name() const noexcept override { return "AP"; }

    /// Samples whose update was skipped because the factorization failed.
    std::size_t skipped_updates() const noexcept { return skipped_; }

private:
    StepOutput do_step(double x, double d) override;

    std::size_t order_;
    double mu_;
    double eps_;
    std::vector<double> h_;
    SampleHistory x_;
    SampleHistory d_;
    ApBlock block_;
    std::size_t skipped_ = 0;
};

class RlsFilter final : public AdaptiveFilter {
public:
    RlsFilter(std::size_t taps, double lambda, double delta_init);

    std::span<const double> coefficients() const noexcept override { return h_; }
    std::string_view name() const noexcept override { return "RLS"; }
    const RlsState& state() const noexcept { return state_; }

private:
    StepOutput do_step(double x, double d) override;

    std::vector<double> h_;
    RlsState state_;
    SampleHistory x_;
};

}  // namespace anc
