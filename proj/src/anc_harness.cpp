#include "anc/anc_harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "anc/error.hpp"

namespace anc {

std::string display_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::lms: return "LMS";
        case Algorithm::nlms: return "NLMS";
        case Algorithm::ap: return "APA";
        case Algorithm::rls: return "RLS";
        case Algorithm::feds: return "FEDS";
        case Algorithm::fap: return "FAPA";
    }
    return "?";
}

std::string flag_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::lms: return "lms";
        case Algorithm::nlms: return "nlms";
        case Algorithm::ap: return "ap";
        case Algorithm::rls: return "rls";
        case Algorithm::feds: return "feds";
        case Algorithm::fap: return "fap";
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    for (Algorithm a : kAllAlgorithms) {
        if (name == flag_name(a)) return a;
    }
    if (name == "apa") return Algorithm::ap;
    if (name == "fapa") return Algorithm::fap;
    return std::nullopt;
}

namespace {

bool uses_mu(Algorithm a) { return a != Algorithm::rls; }

double default_mu(Algorithm a) {
    switch (a) {
        case Algorithm::lms: return defaults::kMuLms;
        case Algorithm::nlms: return defaults::kMuNlms;
        case Algorithm::ap: return defaults::kMuAp;
        case Algorithm::feds:
        case Algorithm::fap: return defaults::kMuFedsFap;
        case Algorithm::rls: return 0.0;
    }
    return 0.0;
}

bool is_matching_pursuit(Algorithm a) { return a == Algorithm::feds || a == Algorithm::fap; }

template <typename T>
void note_ignored(const std::optional<T>& field, bool used, const char* name, Algorithm algo,
                  std::vector<std::string>* warnings) {
    if (field && !used && warnings) {
        warnings->push_back(std::string(name) + " is ignored by " + display_name(algo));
    }
}

}  // namespace

ResolvedConfig resolve(const AlgoConfig& c, std::vector<std::string>* warnings) {
    const Algorithm a = c.algorithm;
    note_ignored(c.mu, uses_mu(a), "mu", a, warnings);
    note_ignored(c.lambda, a == Algorithm::rls, "lambda", a, warnings);
    note_ignored(c.delta_init, a == Algorithm::rls, "delta_init", a, warnings);
    note_ignored(c.delta, a == Algorithm::nlms, "delta", a, warnings);
    note_ignored(c.eps, a == Algorithm::ap, "eps", a, warnings);
    note_ignored(c.order, a == Algorithm::ap, "K", a, warnings);
    note_ignored(c.window, is_matching_pursuit(a), "L", a, warnings);
    note_ignored(c.iterations, is_matching_pursuit(a), "P", a, warnings);

    ResolvedConfig r{};
    r.algorithm = a;
    r.taps = c.taps;
    r.mu = c.mu.value_or(default_mu(a));
    r.lambda = c.lambda.value_or(defaults::kLambda);
    r.delta = c.delta.value_or(defaults::kDelta);
    r.eps = c.eps.value_or(defaults::kEps);
    r.order = c.order.value_or(defaults::kApOrder);
    r.window = c.window.value_or(defaults::kWindow);
    r.iterations = c.iterations.value_or(defaults::kIterations);
    r.delta_init = c.delta_init.value_or(defaults::kDeltaInit);
    r.seed = c.seed;

    if (r.taps == 0) throw ConfigError("M must be at least 1");
    if (uses_mu(a) && !(r.mu > 0.0 && std::isfinite(r.mu))) throw ConfigError("mu must be positive");
    switch (a) {
        case Algorithm::lms: break;
        case Algorithm::nlms:
            if (!(r.delta >= 0.0)) throw ConfigError("delta must be non-negative");
            break;
        case Algorithm::ap:
            if (r.order == 0) throw ConfigError("K must be at least 1");
            if (!(r.eps >= 0.0)) throw ConfigError("eps must be non-negative");
            if (r.order > r.taps && warnings) warnings->push_back("K > M: projection order exceeds filter length");
            break;
        case Algorithm::rls:
            if (!(r.lambda > 0.0 && r.lambda <= 1.0)) throw ConfigError("lambda must satisfy 0 < lambda <= 1");
            if (!(r.delta_init > 0.0)) throw ConfigError("delta_init must be positive");
            break;
        case Algorithm::feds:
        case Algorithm::fap:
            if (r.window <= r.taps) {
                throw ConfigError(display_name(a) + " requires L > M (got L=" + std::to_string(r.window) +
                                  ", M=" + std::to_string(r.taps) + ")");
            }
            if (r.iterations == 0) throw ConfigError(display_name(a) + " requires P >= 1");
            break;
    }
    return r;
}

std::string describe(const ResolvedConfig& r) {
    std::ostringstream out;
    out << "algo=" << flag_name(r.algorithm) << " M=" << r.taps;
    switch (r.algorithm) {
        case Algorithm::lms: out << " mu=" << format_number(r.mu); break;
        case Algorithm::nlms: out << " mu=" << format_number(r.mu) << " delta=" << format_number(r.delta); break;
        case Algorithm::ap:
            out << " mu=" << format_number(r.mu) << " K=" << r.order << " eps=" << format_number(r.eps);
            break;
        case Algorithm::rls:
            out << " lambda=" << format_number(r.lambda) << " delta_init=" << format_number(r.delta_init);
            break;
        case Algorithm::feds:
        case Algorithm::fap:
            out << " mu=" << format_number(r.mu) << " L=" << r.window << " P=" << r.iterations;
            break;
    }
    return out.str();
}

std::unique_ptr<AdaptiveFilter> make_filter(const ResolvedConfig& r) {
    switch (r.algorithm) {
        case Algorithm::lms: return std::make_unique<LmsFilter>(r.taps, r.mu);
        case Algorithm::nlms: return std::make_unique<NlmsFilter>(r.taps, r.mu, r.delta);
        case Algorithm::ap: return std::make_unique<ApFilter>(r.taps, r.order, r.mu, r.eps);
        case Algorithm::rls: return std::make_unique<RlsFilter>(r.taps, r.lambda, r.delta_init);
        case Algorithm::feds:
        case Algorithm::fap: {
            FedsFapConfig fc;
            fc.mode = r.algorithm == Algorithm::feds ? SelectionMode::feds : SelectionMode::fap;
            fc.taps = r.taps;
            fc.window = r.window;
            fc.iterations = r.iterations;
            fc.mu = r.mu;
            return std::make_unique<FedsFapFilter>(fc);
        }
    }
    throw ConfigError("unknown algorithm");
}

AncResult run_anc(const AlgoConfig& config, const Signal& primary, const Signal& reference, const Signal* clean,
                  const RunOptions& options) {
    if (primary.size() != reference.size()) {
        throw ConfigError("primary and reference lengths differ (" + std::to_string(primary.size()) + " vs " +
                          std::to_string(reference.size()) + ")");
    }
    if (clean && clean->size() != primary.size()) throw ConfigError("clean and primary lengths differ");
    if (primary.size() == 0) throw ConfigError("empty signal");

    const ResolvedConfig resolved = resolve(config);
    auto filter = make_filter(resolved);

    const std::size_t n_total = primary.size();
    AncResult result;
    result.denoised.sample_rate = primary.sample_rate;
    result.denoised.samples.resize(n_total);
    result.mse_curve.resize(n_total);

    const std::size_t period = options.snapshot_period;
    for (std::size_t n = 0; n < n_total; ++n) {
        const StepOutput out = filter->step(reference.samples[n], primary.samples[n]);
        const double e = primary.samples[n] - out.y;
        result.denoised.samples[n] = e;
        result.mse_curve[n] = e * e;
        if (period != 0 && (n % period == 0 || n + 1 == n_total)) {
            const auto h = filter->coefficients();
            result.coeff_trajectory.push_back({n, {h.begin(), h.end()}});
        }
    }
    result.mse_smoothed = smooth_mse(result.mse_curve, std::max<std::size_t>(1, options.smoothing_window));
    if (const auto* mp = dynamic_cast<const FedsFapFilter*>(filter.get())) {
        result.multiply_counts = mp->multiply_count();
    }

    if (clean) {
        const auto skip = static_cast<std::size_t>(options.output_skip_fraction * static_cast<double>(n_total));
        result.snr_in = snr_db(*clean, primary, 0);
        result.snr_out = snr_db(*clean, result.denoised, std::min(skip, n_total - 1));
        result.snri = *result.snr_out - *result.snr_in;
    }
    return result;
}

double snr_db(const Signal& clean, const Signal& contaminated, std::size_t skip) {
    if (clean.size() != contaminated.size()) throw ConfigError("SNR inputs differ in length");
    if (skip >= clean.size()) throw ConfigError("SNR warm-up skip must be shorter than the signal");
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t n = skip; n < clean.size(); ++n) {
        const double s = clean.samples[n];
        const double v = contaminated.samples[n] - s;
        signal += s * s;
        noise += v * v;
    }
    if (signal == 0.0) throw ConfigError("silent reference segment");
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / noise);
}

std::vector<double> smooth_mse(const std::vector<double>& curve, std::size_t window) {
    if (window == 0) throw ConfigError("smoothing window must be at least 1");
    const std::size_t n = curve.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + curve[i];
    const std::size_t back = (window - 1) / 2;
    const std::size_t ahead = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= back ? i - back : 0;
        const std::size_t hi = std::min(n, i + ahead + 1);
        if (window == 1) {
            out[i] = curve[i];
        } else {
            out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
        }
    }
    return out;
}

std::optional<SweepParam> parse_sweep_param(const std::string& name) {
    if (name == "m") return SweepParam::taps;
    if (name == "l") return SweepParam::window;
    if (name == "mu") return SweepParam::mu;
    if (name == "p") return SweepParam::iterations;
    return std::nullopt;
}

std::string flag_name(SweepParam param) {
    switch (param) {
        case SweepParam::taps: return "m";
        case SweepParam::window: return "l";
        case SweepParam::mu: return "mu";
        case SweepParam::iterations: return "p";
    }
    return "?";
}

namespace {

std::size_t as_count(double value) {
    if (!(value >= 0.0) || value != std::floor(value)) {
        throw ConfigError("expected a non-negative integer, got " + format_number(value));
    }
    return static_cast<std::size_t>(value);
}

SweepRow sweep_row(const AlgoConfig& base, SweepParam param, double value, const AncScenario& scenario,
                   const RunOptions& options) {
    SweepRow row;
    row.value = value;
    try {
        AlgoConfig cfg = base;
        switch (param) {
            case SweepParam::taps: cfg.taps = as_count(value); break;
            case SweepParam::window: cfg.window = as_count(value); break;
            case SweepParam::mu: cfg.mu = value; break;
            case SweepParam::iterations: cfg.iterations = as_count(value); break;
        }
        const AncResult r = run_anc(cfg, scenario.primary, scenario.reference, &scenario.clean, options);
        row.snri = r.snri;
        row.snr_out = r.snr_out;
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(const AlgoConfig& base, SweepParam param, const std::vector<double>& values,
                            const AncScenario& scenario, unsigned threads, const RunOptions& options) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<SweepRow> rows(values.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(values.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < values.size(); ++i) rows[i] = sweep_row(base, param, values[i], scenario, options);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < values.size(); i = next++) {
                rows[i] = sweep_row(base, param, values[i], scenario, options);
            }
        });
    }
    for (auto& t : pool) t.join();
    return rows;
}

std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].snri) continue;
        if (!best || *rows[i].snri > *rows[*best].snri) best = i;
    }
    return best;
}

}  // namespace anc
