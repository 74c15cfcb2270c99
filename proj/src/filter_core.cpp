#include "anc/filter_core.hpp"

#include <cmath>
#include <string>

#include "anc/error.hpp"

namespace anc {

SampleHistory::SampleHistory(std::size_t capacity) : capacity_(capacity), buf_(2 * capacity, 0.0) {
    if (capacity == 0) throw ConfigError("sample history needs a positive capacity");
}

void SampleHistory::push(double value) noexcept {
    pos_ = pos_ == 0 ? capacity_ - 1 : pos_ - 1;
    buf_[pos_] = value;
    buf_[pos_ + capacity_] = value;
}

void SampleHistory::clear() noexcept {
    std::fill(buf_.begin(), buf_.end(), 0.0);
    pos_ = 0;
}

double predict(std::span<const double> h, std::span<const double> x) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * x[k];
    return acc;
}

bool all_finite(std::span<const double> h) noexcept {
    for (double v : h) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

namespace {

void require_same_size(std::span<const double> h, std::span<const double> x) {
    if (h.size() != x.size()) throw ConfigError("coefficient and regressor lengths differ");
}

}  // namespace

StepOutput lms_step(std::span<double> h, std::span<const double> x, double d, double mu) {
    require_same_size(h, x);
    StepOutput out;
    out.y = predict(h, x);
    out.e = d - out.y;
    const double g = mu * out.e;
    for (std::size_t k = 0; k < h.size(); ++k) h[k] += g * x[k];
    return out;
}

StepOutput nlms_step(std::span<double> h, std::span<const double> x, double d, double mu, double delta) {
    require_same_size(h, x);
    StepOutput out;
    out.y = predict(h, x);
    out.e = d - out.y;
    double energy = 0.0;
    for (double v : x) energy += v * v;
    const double denom = delta + energy;
    if (denom <= 0.0) return out;
    const double g = mu * out.e / denom;
    for (std::size_t k = 0; k < h.size(); ++k) h[k] += g * x[k];
    return out;
}

ApStepOutput ap_step(std::span<double> h, const ApBlock& block, double mu, double eps) {
    const auto rows = block.X.rows();
    if (static_cast<std::size_t>(block.X.cols()) != h.size() || block.d.size() != rows) {
        throw ConfigError("affine projection block dimensions do not match the filter");
    }
    Eigen::Map<Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(h.size()));

    ApStepOutput out;
    out.y = block.X * hv;
    out.e = block.d - out.y;

    Eigen::MatrixXd gram = block.X * block.X.transpose();
    gram.diagonal().array() += eps;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        out.factorized = false;
        return out;
    }
    hv += mu * (block.X.transpose() * llt.solve(out.e));
    return out;
}

RlsState rls_init(std::size_t taps, double lambda, double delta_init) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("RLS forgetting factor must satisfy 0 < lambda <= 1 (got " + std::to_string(lambda) + ")");
    }
    if (!(delta_init > 0.0)) throw ConfigError("RLS delta_init must be positive");
    if (taps == 0) throw ConfigError("filter needs at least one tap");
    RlsState state;
    const auto m = static_cast<Eigen::Index>(taps);
    state.inverse_correlation = delta_init * Eigen::MatrixXd::Identity(m, m);
    state.lambda = lambda;
    state.delta_init = delta_init;
    return state;
}

StepOutput rls_step(std::span<double> h, RlsState& state, std::span<const double> x, double d) {
    require_same_size(h, x);
    const auto m = static_cast<Eigen::Index>(h.size());
    if (state.inverse_correlation.rows() != m) throw ConfigError("RLS state dimension does not match the filter");

    Eigen::Map<Eigen::VectorXd> hv(h.data(), m);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), m);

    StepOutput out;
    out.y = hv.dot(xv);
    out.e = d - out.y;

    auto& pinv = state.inverse_correlation;
    const Eigen::VectorXd pi = pinv * xv;
    const Eigen::VectorXd gain = pi / (state.lambda + xv.dot(pi));
    hv += gain * out.e;
    pinv.noalias() -= gain * pi.transpose();
    pinv /= state.lambda;
    pinv = 0.5 * (pinv + pinv.transpose()).eval();
    return out;
}

// ---------------------------------------------------------------------------

StepOutput AdaptiveFilter::step(double x, double d) {
    const StepOutput out = do_step(x, d);
    const std::size_t index = processed_++;
    if (!all_finite(coefficients()) || !std::isfinite(out.y)) throw DivergenceError(index);
    return out;
}

namespace {

std::size_t checked_taps(std::size_t taps) {
    if (taps == 0) throw ConfigError("filter needs at least one tap");
    return taps;
}

void check_mu(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("step size mu must be positive");
}

}  // namespace

LmsFilter::LmsFilter(std::size_t taps, double mu) : mu_(mu), h_(checked_taps(taps), 0.0), x_(taps) {
    check_mu(mu);
}

StepOutput LmsFilter::do_step(double x, double d) {
    x_.push(x);
    return lms_step(h_, x_.view(0, h_.size()), d, mu_);
}

NlmsFilter::NlmsFilter(std::size_t taps, double mu, double delta)
    : mu_(mu), delta_(delta), h_(checked_taps(taps), 0.0), x_(taps) {
    check_mu(mu);
    if (!(delta >= 0.0)) throw ConfigError("NLMS regularizer delta must be non-negative");
}

StepOutput NlmsFilter::do_step(double x, double d) {
    x_.push(x);
    return nlms_step(h_, x_.view(0, h_.size()), d, mu_, delta_);
}

ApFilter::ApFilter(std::size_t taps, std::size_t order, double mu, double eps)
    : order_(order),
      mu_(mu),
      eps_(eps),
      h_(checked_taps(taps), 0.0),
      x_(taps + (order == 0 ? 0 : order - 1)),
      d_(order == 0 ? 1 : order) {
    check_mu(mu);
    if (order == 0) throw ConfigError("affine projection order K must be at least 1");
    if (!(eps >= 0.0)) throw ConfigError("affine projection regularizer eps must be non-negative");
    block_.X.resize(static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(taps));
    block_.d.resize(static_cast<Eigen::Index>(order));
}

StepOutput ApFilter::do_step(double x, double d) {
    x_.push(x);
    d_.push(d);
    const std::size_t m = h_.size();
    for (std::size_t i = 0; i < order_; ++i) {
        const auto row = x_.view(i, m);
        for (std::size_t k = 0; k < m; ++k) {
            block_.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
        block_.d(static_cast<Eigen::Index>(i)) = d_.at(i);
    }
    const ApStepOutput out = ap_step(h_, block_, mu_, eps_);
    if (!out.factorized) ++skipped_;
    return {out.y(0), out.e(0)};
}

RlsFilter::RlsFilter(std::size_t taps, double lambda, double delta_init)
    : h_(checked_taps(taps), 0.0), state_(rls_init(taps, lambda, delta_init)), x_(taps) {}

StepOutput RlsFilter::do_step(double x, double d) {
    x_.push(x);
    return rls_step(h_, state_, x_.view(0, h_.size()), d);
}

}  // namespace anc
