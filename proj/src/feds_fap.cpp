#include "anc/feds_fap.hpp"

#include <cmath>
#include <string>

#include "anc/error.hpp"

namespace anc {

GramCache::GramCache(std::size_t taps, std::size_t window)
    : taps_(taps),
      window_(window),
      x_(taps + window),
      d_(window + 1),
      lead_(taps * taps, 0.0),
      cross_(taps, 0.0) {
    if (taps == 0) throw ConfigError("filter needs at least one tap");
    if (window == 0) throw ConfigError("window length L must be positive");
}

void GramCache::update(double x_new, double d_new) noexcept {
    x_.push(x_new);
    d_.push(d_new);

    const double* prev = &lead_[head_ * taps_];
    head_ = head_ == 0 ? taps_ - 1 : head_ - 1;
    double* row = &lead_[head_ * taps_];

    const double x_in = x_.at(0);
    const double x_out = x_.at(window_);
    const auto in = x_.view(0, taps_);
    const auto out = x_.view(window_, taps_);
    for (std::size_t lag = 0; lag < taps_; ++lag) {
        row[lag] = prev[lag] + x_in * in[lag] - x_out * out[lag];
    }

    const double d_in = d_.at(0);
    const double d_out = d_.at(window_);
    for (std::size_t j = 0; j < taps_; ++j) {
        cross_[j] += d_in * in[j] - d_out * out[j];
    }
}

void GramCache::refresh() noexcept {
    for (std::size_t age = 0; age < taps_; ++age) {
        double* row = &lead_[slot(age) * taps_];
        for (std::size_t lag = 0; age + lag < taps_; ++lag) {
            const auto a = x_.view(age, window_);
            const auto b = x_.view(age + lag, window_);
            double acc = 0.0;
            for (std::size_t i = 0; i < window_; ++i) acc += a[i] * b[i];
            row[lag] = acc;
        }
    }
    const auto d = d_.view(0, window_);
    for (std::size_t j = 0; j < taps_; ++j) {
        const auto col = x_.view(j, window_);
        double acc = 0.0;
        for (std::size_t i = 0; i < window_; ++i) acc += d[i] * col[i];
        cross_[j] = acc;
    }
}

double residual_correlation(const GramCache& cache, std::span<const double> h, std::size_t j) {
    if (j >= cache.taps()) throw ConfigError("coefficient index out of range");
    double acc = cache.cross(j);
    for (std::size_t k = 0; k < h.size(); ++k) acc -= h[k] * cache.gram(k, j);
    return acc;
}

SelectionResult select_max_projection(std::span<const double> residual, const GramCache& cache,
                                      double sigma_min) {
    SelectionResult best;
    double best_score = -1.0;
    for (std::size_t j = 0; j < residual.size(); ++j) {
        const double norm_sq = cache.gram(j, j);
        if (!(norm_sq > sigma_min)) continue;
        const double score = residual[j] * residual[j] / norm_sq;
        if (score > best_score) {
            best_score = score;
            best = {j, residual[j], norm_sq, true};
        }
    }
    return best;
}

SelectionResult select_fap(const GramCache& cache, std::span<const double> h, double sigma_min) {
    std::vector<double> residual(cache.taps());
    for (std::size_t j = 0; j < residual.size(); ++j) residual[j] = residual_correlation(cache, h, j);
    return select_max_projection(residual, cache, sigma_min);
}

void validate(const FedsFapConfig& config) {
    if (config.taps == 0) throw ConfigError("filter needs at least one tap");
    if (config.window <= config.taps) {
        throw ConfigError("FEDS/FAP requires L > M (got L=" + std::to_string(config.window) +
                          ", M=" + std::to_string(config.taps) + ")");
    }
    if (config.iterations == 0) throw ConfigError("FEDS/FAP requires P >= 1");
    if (!(config.mu > 0.0) || !std::isfinite(config.mu)) throw ConfigError("step size mu must be positive");
    if (!(config.sigma_min >= 0.0)) throw ConfigError("sigma_min must be non-negative");
}

FedsFapFilter::FedsFapFilter(const FedsFapConfig& config)
    : config_((validate(config), config)),
      h_(config.taps, 0.0),
      cache_(config.taps, config.window),
      residual_(config.taps, 0.0) {
    selections_.reserve(config.iterations);
}

void FedsFapFilter::update_cache(double x_new, double d_new) {
    const std::size_t m = config_.taps;
    const std::size_t l = config_.window;
    tally_ = {};
    cache_.update(x_new, d_new);
    tally_.cache_update = cache_.update_multiplies();

    if (config_.refresh_period != 0 && ++since_refresh_ >= config_.refresh_period) {
        since_refresh_ = 0;
        cache_.refresh();
        recompute_residuals();
        tally_.refresh = cache_.refresh_multiplies() + m * m;
        y_prior_ = predict(h_, cache_.inputs().view(0, m));
        tally_.output = m;
        output_delta_ = 0.0;
        return;
    }

    // residual_j moves by x(n-j) e_in - x(n-j-L) e_out, where e_in and e_out
    // are the errors of the current h on the entering and leaving samples.
    const auto& xs = cache_.inputs();
    y_prior_ = predict(h_, xs.view(0, m));
    const double e_in = cache_.desired().at(0) - y_prior_;
    const double e_out = cache_.desired().at(l) - predict(h_, xs.view(l, m));
    const auto in = xs.view(0, m);
    const auto out = xs.view(l, m);
    for (std::size_t j = 0; j < m; ++j) residual_[j] += in[j] * e_in - out[j] * e_out;
    tally_.residual_tracking = 4 * m;
    output_delta_ = 0.0;
}

void FedsFapFilter::recompute_residuals() {
    for (std::size_t j = 0; j < config_.taps; ++j) residual_[j] = residual_correlation(cache_, h_, j);
}

SelectionResult FedsFapFilter::select_feds() {
    const std::size_t j = counter_;
    counter_ = (counter_ + 1) % config_.taps;
    const double norm_sq = cache_.gram(j, j);
    SelectionResult sel{j, residual_[j], norm_sq, norm_sq > config_.sigma_min};
    if (!sel.active) sel.residual_corr = 0.0;
    return sel;
}

void FedsFapFilter::p_iterate() {
    const std::size_t m = config_.taps;
    const auto x_now = cache_.inputs().view(0, m);
    selections_.clear();
    for (std::size_t it = 0; it < config_.iterations; ++it) {
        SelectionResult sel;
        if (config_.mode == SelectionMode::feds) {
            sel = select_feds();
        } else {
            sel = select_max_projection(residual_, cache_, config_.sigma_min);
            tally_.score_evaluations += m;
            tally_.selection += 2 * m;
        }
        selections_.push_back(sel.index);
        if (!sel.active) continue;

        const double delta = config_.mu * (sel.residual_corr / sel.norm_sq);
        h_[sel.index] += delta;
        for (std::size_t j = 0; j < m; ++j) residual_[j] -= delta * cache_.gram(sel.index, j);
        output_delta_ += delta * x_now[sel.index];
        tally_.coefficient_updates += 2 + m;
        tally_.output += 1;
    }
}

StepOutput FedsFapFilter::do_step(double x, double d) {
    update_cache(x, d);
    p_iterate();
    StepOutput out;
    out.y = y_prior_ + output_delta_;
    out.e = d - out.y;
    return out;
}

}  // namespace anc
