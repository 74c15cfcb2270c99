#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "anc/filter_core.hpp"

namespace anc {

/// Columns with squared norm at or below this are never selected.
inline constexpr double kSigmaMin = 1e-12;

/// Windowed inner products of the Toeplitz data matrix whose column j is
/// x_j(n) = [x(n-j), ..., x(n-j-L+1)] and of the desired window
/// d(n) = [d(n), ..., d(n-L+1)]:
///
///   gram(k, j) = <x_k(n), x_j(n)>,   cross(j) = <d(n), x_j(n)>.
///
/// Since x_k(n) = x_{k-1}(n-1), gram(k, j) equals the leading-row entry
/// <x_0(n-k), x_{j-k}(n-k)> for k <= j. Only the leading row is computed per
/// sample (2M products) and the last M leading rows are kept, so gram(k, j)
/// and gram(j, k) read the same stored value.
class GramCache {
public:
    GramCache(std::size_t taps, std::size_t window);

    /// Slides the window by one sample. Samples before the first update are
    /// zero.
    void update(double x_new, double d_new) noexcept;

    /// Recomputes every stored entry from the sample history.
    void refresh() noexcept;

    double gram(std::size_t k, std::size_t j) const noexcept {
        const std::size_t age = k < j ? k : j;
        const std::size_t lag = k < j ? j - k : k - j;
        return lead_[slot(age) * taps_ + lag];
    }
    double cross(std::size_t j) const noexcept { return cross_[j]; }
    std::span<const double> cross() const noexcept { return cross_; }

    std::size_t taps() const noexcept { return taps_; }
    std::size_t window() const noexcept { return window_; }

    /// x(n - lag) for lag < taps + window.
    const SampleHistory& inputs() const noexcept { return x_; }
    /// d(n - lag) for lag <= window.
    const SampleHistory& desired() const noexcept { return d_; }

    /// Multiplications performed by one update().
    std::size_t update_multiplies() const noexcept { return 4 * taps_; }
    /// Multiplications performed by one refresh().
    std::size_t refresh_multiplies() const noexcept { return (taps_ * (taps_ + 1) / 2 + taps_) * window_; }

private:
    std::size_t slot(std::size_t age) const noexcept { return (head_ + age) % taps_; }

    std::size_t taps_;
    std::size_t window_;
    SampleHistory x_;
    SampleHistory d_;
    std::vector<double> lead_;  // taps_ rows (one per recent time) of taps_ lags
    std::size_t head_ = 0;      // row holding time n
    std::vector<double> cross_;
};

/// <d(n), x_j(n)> - sum_k h_k <x_k(n), x_j(n)>, which is <e(n), x_j(n)> for the
/// windowed error e(n) = d(n) - X(n) h.
double residual_correlation(const GramCache& cache, std::span<const double> h, std::size_t j);

struct SelectionResult {
    std::size_t index = 0;
    double residual_corr = 0.0;
    double norm_sq = 0.0;
    bool active = false;  // false: degenerate column, the P-iteration is a no-op
};

/// Column onto which the windowed error has the largest normalized
/// projection, |residual[j]| / sqrt(gram(j, j)), among columns with
/// gram(j, j) > sigma_min. Ties go to the lowest index.
SelectionResult select_max_projection(std::span<const double> residual, const GramCache& cache,
                                      double sigma_min = kSigmaMin);

/// select_max_projection with residuals computed from scratch.
SelectionResult select_fap(const GramCache& cache, std::span<const double> h, double sigma_min = kSigmaMin);

enum class SelectionMode { feds, fap };

/// Per-sample multiplication tally. Divisions count as multiplications.
struct MultiplyTally {
    std::size_t cache_update = 0;       // sliding-window inner products
    std::size_t residual_tracking = 0;  // carrying residual correlations to the new window
    std::size_t selection = 0;          // projection scores
    std::size_t coefficient_updates = 0;
    std::size_t output = 0;
    std::size_t refresh = 0;            // periodic from-scratch recomputation
    std::size_t score_evaluations = 0;  // number of scores, not multiplications

    std::size_t total() const noexcept {
        return cache_update + residual_tracking + selection + coefficient_updates + output + refresh;
    }
    bool operator==(const MultiplyTally&) const = default;
};

struct FedsFapConfig {
    SelectionMode mode = SelectionMode::fap;
    std::size_t taps = 8;           // M
    std::size_t window = 25;        // L, must exceed taps
    std::size_t iterations = 8;     // P, coefficient updates per sample
    double mu = 0.002;
    std::size_t refresh_period = 1000;  // 0 disables refresh
    double sigma_min = kSigmaMin;
};

void validate(const FedsFapConfig& config);

/// Sliding-window FEDS (cyclic coordinate selection) and FAP (greedy
/// matching-pursuit selection). Each sample slides the inner-product cache,
/// then performs P single-coefficient updates
///
///   h_j += mu * residual[j] / gram(j, j)
///
/// with residual[] kept current across updates. Cost per sample is linear in
/// M and independent of L outside refresh samples.
class FedsFapFilter final : public AdaptiveFilter {
public:
    explicit FedsFapFilter(const FedsFapConfig& config);

    std::span<const double> coefficients() const noexcept override { return h_; }
    std::string_view name() const noexcept override {
        return config_.mode == SelectionMode::feds ? "FEDS" : "FAP";
    }

    /// Slides the cache and carries the residual correlations to the new
    /// window. step() calls this, then p_iterate().
    void update_cache(double x_new, double d_new);

    /// P selections and single-coefficient updates on the current window.
    void p_iterate();

    /// Next index in the cyclic order. Advances the counter.
    SelectionResult select_feds();

    const GramCache& cache() const noexcept { return cache_; }
    const FedsFapConfig& config() const noexcept { return config_; }
    std::span<const double> residuals() const noexcept { return residual_; }
    std::size_t sequence_counter() const noexcept { return counter_; }

    /// Indices selected during the most recent step, one per P-iteration.
    std::span<const std::size_t> last_selections() const noexcept { return selections_; }
    const MultiplyTally& multiply_count() const noexcept { return tally_; }

private:
    StepOutput do_step(double x, double d) override;
    void recompute_residuals();

    FedsFapConfig config_;
    std::vector<double> h_;
    GramCache cache_;
    std::vector<double> residual_;
    std::size_t counter_ = 0;
    std::size_t since_refresh_ = 0;
    double y_prior_ = 0.0;       // h(n-1)^T x(n)
    double output_delta_ = 0.0;  // change of h^T x(n) during p_iterate
    std::vector<std::size_t> selections_;
    MultiplyTally tally_;
};

}  // namespace anc
