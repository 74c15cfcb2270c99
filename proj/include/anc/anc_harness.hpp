#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anc/feds_fap.hpp"
#include "anc/filter_core.hpp"
#include "anc/signal_io.hpp"

namespace anc {

enum class Algorithm { lms, nlms, ap, rls, feds, fap };

/// Row order used by comparison tables.
inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::lms,  Algorithm::nlms, Algorithm::ap,
                                               Algorithm::feds, Algorithm::fap,  Algorithm::rls};

std::string display_name(Algorithm algo);   // LMS, NLMS, APA, FEDS, FAPA, RLS
std::string flag_name(Algorithm algo);      // lms, nlms, ap, feds, fap, rls
std::optional<Algorithm> parse_algorithm(const std::string& name);

/// Run configuration. Unset optional fields take the per-algorithm defaults
/// below; fields the algorithm does not use are ignored with a warning.
struct AlgoConfig {
    Algorithm algorithm = Algorithm::nlms;
    std::size_t taps = 8;  // M
    std::optional<double> mu;
    std::optional<double> lambda;
    std::optional<double> delta;       // NLMS regularizer
    std::optional<double> eps;         // AP regularizer
    std::optional<std::size_t> order;  // AP projection order K
    std::optional<std::size_t> window;      // FEDS/FAP L
    std::optional<std::size_t> iterations;  // FEDS/FAP P
    std::optional<double> delta_init;  // RLS
    std::uint64_t seed = 1;            // recorded with results; the filters are deterministic
};

namespace defaults {
inline constexpr double kMuLms = 0.002;
inline constexpr double kMuNlms = 0.005;
inline constexpr double kMuAp = 0.005;
inline constexpr double kMuFedsFap = 0.002;
inline constexpr double kLambda = 0.99;
inline constexpr double kDelta = 1e-8;
inline constexpr double kEps = 1e-6;
inline constexpr std::size_t kApOrder = 3;
inline constexpr std::size_t kWindow = 25;
inline constexpr std::size_t kIterations = 8;
inline constexpr double kDeltaInit = 1e3;
inline constexpr std::size_t kSnapshotPeriod = 100;
inline constexpr std::size_t kSmoothingWindow = 256;
}  // namespace defaults

/// Fully resolved parameters of a run.
struct ResolvedConfig {
    Algorithm algorithm;
    std::size_t taps;
    double mu;
    double lambda;
    double delta;
    double eps;
    std::size_t order;
    std::size_t window;
    std::size_t iterations;
    double delta_init;
    std::uint64_t seed;
};

/// Fills defaults and checks invariants. Throws ConfigError; appends a
/// message to `warnings` for each ignored field.
ResolvedConfig resolve(const AlgoConfig& config, std::vector<std::string>* warnings = nullptr);

/// One line, key=value pairs of the parameters the algorithm uses.
std::string describe(const ResolvedConfig& config);

std::unique_ptr<AdaptiveFilter> make_filter(const ResolvedConfig& config);

struct CoefficientSnapshot {
    std::size_t sample = 0;
    std::vector<double> taps;
};

struct AncResult {
    Signal denoised;                        // e(n) = primary(n) - y(n)
    std::vector<double> mse_curve;          // e(n)^2
    std::vector<double> mse_smoothed;
    std::vector<CoefficientSnapshot> coeff_trajectory;
    std::optional<double> snr_in;
    std::optional<double> snr_out;
    std::optional<double> snri;
    std::optional<MultiplyTally> multiply_counts;  // FEDS/FAP, last sample
};

struct RunOptions {
    std::size_t snapshot_period = defaults::kSnapshotPeriod;
    std::size_t smoothing_window = defaults::kSmoothingWindow;
    /// Fraction of the run excluded from snr_out.
    double output_skip_fraction = 0.1;
};

/// Adaptive noise cancellation: the reference feeds the filter input, the
/// primary is the desired signal, and the denoised output is the error.
/// `clean` is used only for scoring.
AncResult run_anc(const AlgoConfig& config, const Signal& primary, const Signal& reference,
                  const Signal* clean = nullptr, const RunOptions& options = {});

/// 10 log10(sum clean^2 / sum (contaminated - clean)^2) over n >= skip.
/// Returns +infinity when the two agree exactly.
double snr_db(const Signal& clean, const Signal& contaminated, std::size_t skip = 0);

/// Centered moving average; windows are truncated at the edges.
std::vector<double> smooth_mse(const std::vector<double>& curve, std::size_t window);

enum class SweepParam { taps, window, mu, iterations };

std::optional<SweepParam> parse_sweep_param(const std::string& name);
std::string flag_name(SweepParam param);

struct SweepRow {
    double value = 0.0;
    std::optional<double> snri;
    std::optional<double> snr_out;
    std::string error;  // set when the row failed
};

/// One run_anc per value over the same scenario. Rows keep input order
/// whether or not they run concurrently.
std::vector<SweepRow> sweep(const AlgoConfig& base, SweepParam param, const std::vector<double>& values,
                            const AncScenario& scenario, unsigned threads = 1,
                            const RunOptions& options = {});

/// Index of the row with the largest SNRI, if any row succeeded. Ties go to
/// the first row.
std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows);

}  // namespace anc
