// anc: adaptive noise cancellation runs, parameter sweeps, synthetic scenarios
// and algorithm comparisons.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
// 3 filter divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "anc/anc_harness.hpp"
#include "anc/error.hpp"
#include "anc/signal_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDiverged = 3;

struct FilterFlags {
    std::string algo;
    std::size_t m = 8;
    std::optional<double> mu, lambda, delta, eps, delta_init;
    std::optional<std::size_t> k, l, p;
};

struct ScenarioFlags {
    std::string primary, reference, clean;
    std::string channel;  // verbatim flag text
    std::size_t channel_order = 8;
    std::size_t samples = anc::SynthSpec{}.num_samples;
    std::string noise = anc::to_string(anc::SynthSpec{}.noise_kind);
    double rho = anc::SynthSpec{}.noise_rho;
    std::string clean_kind = anc::to_string(anc::SynthSpec{}.clean_kind);
    double input_snr = anc::SynthSpec{}.input_snr_db;
    double peak = anc::SynthSpec{}.peak_level;
    int rate = anc::SynthSpec{}.sample_rate;
};

struct Common {
    std::string out;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::vector<std::string> argv;
};

class UsageError : public anc::Error {
public:
    using anc::Error::Error;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("invalid number '") + item + "' in " + what);
        }
    }
    return values;
}

/// "a:b" or "a:b:step", inclusive.
std::vector<double> parse_range(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("invalid range '" + text + "' (expected start:stop[:step])");
        }
    }
    if (parts.size() < 2 || parts.size() > 3) throw UsageError("invalid range '" + text + "' (expected start:stop[:step])");
    const double step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0)) throw UsageError("range step must be positive");
    std::vector<double> values;
    for (std::size_t i = 0;; ++i) {
        const double v = parts[0] + static_cast<double>(i) * step;
        if (v > parts[1] + 1e-9 * step) break;
        values.push_back(v);
    }
    return values;
}

anc::AlgoConfig to_config(const FilterFlags& f, anc::Algorithm algo, std::uint64_t seed) {
    anc::AlgoConfig c;
    c.algorithm = algo;
    c.taps = f.m;
    c.mu = f.mu;
    c.lambda = f.lambda;
    c.delta = f.delta;
    c.eps = f.eps;
    c.order = f.k;
    c.window = f.l;
    c.iterations = f.p;
    c.delta_init = f.delta_init;
    c.seed = seed;
    return c;
}

anc::Algorithm require_algorithm(const std::string& name) {
    if (name.empty()) throw UsageError("--algo is required (lms, nlms, ap, rls, feds, fap)");
    const auto algo = anc::parse_algorithm(name);
    if (!algo) throw UsageError("unknown algorithm '" + name + "' (valid: lms, nlms, ap, rls, feds, fap)");
    return *algo;
}

anc::SynthSpec to_synth_spec(const ScenarioFlags& s, std::uint64_t seed) {
    anc::SynthSpec spec;
    spec.channel_taps = s.channel.empty() ? anc::default_channel(s.channel_order) : parse_list(s.channel, "--channel");
    spec.num_samples = s.samples;
    if (s.noise == "white") {
        spec.noise_kind = anc::NoiseKind::white;
    } else if (s.noise == "ar1") {
        spec.noise_kind = anc::NoiseKind::ar1;
    } else {
        throw UsageError("unknown noise kind '" + s.noise + "' (valid: white, ar1)");
    }
    spec.noise_rho = s.rho;
    if (s.clean_kind == "ar2") {
        spec.clean_kind = anc::CleanKind::ar2;
    } else if (s.clean_kind == "sine_mix") {
        spec.clean_kind = anc::CleanKind::sine_mix;
    } else {
        throw UsageError("unknown clean kind '" + s.clean_kind + "' (valid: ar2, sine_mix)");
    }
    spec.input_snr_db = s.input_snr;
    spec.peak_level = s.peak;
    spec.seed = seed;
    spec.sample_rate = s.rate;
    return spec;
}

std::string describe_spec(const anc::SynthSpec& spec, const std::string& channel_text) {
    std::ostringstream out;
    std::string taps = channel_text;
    if (taps.empty()) {
        for (std::size_t i = 0; i < spec.channel_taps.size(); ++i) {
            if (i) taps += ',';
            taps += anc::format_number(spec.channel_taps[i]);
        }
    }
    out << "channel=" << taps << '\n'
        << "samples=" << spec.num_samples << '\n'
        << "noise=" << anc::to_string(spec.noise_kind) << '\n'
        << "rho=" << anc::format_number(spec.noise_rho) << '\n'
        << "clean=" << anc::to_string(spec.clean_kind) << '\n'
        << "input_snr_db=" << anc::format_number(spec.input_snr_db) << '\n'
        << "peak=" << anc::format_number(spec.peak_level) << '\n'
        << "seed=" << spec.seed << '\n'
        << "sample_rate=" << spec.sample_rate << '\n';
    return out.str();
}

struct LoadedScenario {
    anc::Signal primary, reference;
    std::optional<anc::Signal> clean;
    std::string provenance;
};

LoadedScenario load_scenario(const ScenarioFlags& s, std::uint64_t seed) {
    LoadedScenario out;
    if (!s.primary.empty() || !s.reference.empty()) {
        if (s.primary.empty() || s.reference.empty()) {
            throw UsageError("--primary and --reference must be given together");
        }
        out.primary = anc::read_wav(s.primary);
        out.reference = anc::read_wav(s.reference);
        if (!s.clean.empty()) out.clean = anc::read_wav(s.clean);
        out.provenance = "primary=" + s.primary + "\nreference=" + s.reference + "\nclean=" + s.clean + "\n";
        return out;
    }
    if (!s.clean.empty()) throw UsageError("--clean requires --primary and --reference");
    const anc::SynthSpec spec = to_synth_spec(s, seed);
    anc::AncScenario scenario = anc::synth_anc_scenario(spec);
    out.primary = std::move(scenario.primary);
    out.reference = std::move(scenario.reference);
    out.clean = std::move(scenario.clean);
    out.provenance = "scenario=synthetic\n" + describe_spec(spec, s.channel);
    return out;
}

fs::path prepare_out(const std::string& dir) {
    if (dir.empty()) throw UsageError("--out is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw anc::IoError(anc::IoErrorKind::unwritable_path, dir, "cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

std::string command_line(const std::vector<std::string>& argv) {
    std::string line;
    for (const auto& a : argv) {
        if (!line.empty()) line += ' ';
        line += a;
    }
    return line;
}

void write_provenance(const fs::path& dir, const Common& common, const std::string& body) {
    anc::write_text_atomic("command=" + command_line(common.argv) + "\n" + body, dir / "provenance.txt");
}

std::string fmt_opt(const std::optional<double>& v) { return v ? anc::format_number(*v) : "n/a"; }

void add_filter_flags(CLI::App* app, FilterFlags& f, bool with_algo) {
    if (with_algo) app->add_option("--algo", f.algo, "lms | nlms | ap | rls | feds | fap");
    app->add_option("--m", f.m, "filter taps M");
    app->add_option("--mu", f.mu, "step size");
    app->add_option("--lambda", f.lambda, "RLS forgetting factor");
    app->add_option("--delta", f.delta, "NLMS regularizer");
    app->add_option("--eps", f.eps, "AP regularizer");
    app->add_option("--k", f.k, "AP projection order K");
    app->add_option("--l", f.l, "FEDS/FAP window length L");
    app->add_option("--p", f.p, "FEDS/FAP iterations per sample P");
    app->add_option("--delta-init", f.delta_init, "RLS initial inverse correlation scale");
}

void add_scenario_flags(CLI::App* app, ScenarioFlags& s, bool with_files) {
    if (with_files) {
        app->add_option("--primary", s.primary, "primary input WAV (speech + noise)");
        app->add_option("--reference", s.reference, "reference noise WAV");
        app->add_option("--clean", s.clean, "clean speech WAV, used for scoring only");
    }
    app->add_option("--channel", s.channel, "comma-separated channel taps");
    app->add_option("--synth-channel-order", s.channel_order, "taps of the default channel");
    app->add_option("--samples", s.samples, "synthetic length");
    app->add_option("--noise", s.noise, "white | ar1");
    app->add_option("--rho", s.rho, "AR(1) noise pole");
    app->add_option("--clean-kind", s.clean_kind, "ar2 | sine_mix");
    app->add_option("--input-snr", s.input_snr, "primary SNR in dB");
    app->add_option("--peak", s.peak, "peak magnitude of the generated signals");
    app->add_option("--rate", s.rate, "sample rate in Hz");
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------

int cmd_run(const FilterFlags& f, const ScenarioFlags& s, const Common& common) {
    const anc::Algorithm algo = require_algorithm(f.algo);
    const anc::AlgoConfig config = to_config(f, algo, common.seed);
    std::vector<std::string> warnings;
    const anc::ResolvedConfig resolved = anc::resolve(config, &warnings);
    print_warnings(warnings);

    const LoadedScenario sc = load_scenario(s, common.seed);
    const fs::path dir = prepare_out(common.out);
    const anc::AncResult r = anc::run_anc(config, sc.primary, sc.reference, sc.clean ? &*sc.clean : nullptr);

    const auto report = anc::write_wav(r.denoised, dir / "denoised.wav");
    if (report.clipped) std::cerr << "warning: " << report.clipped << " samples clipped in denoised.wav\n";

    std::vector<double> index(r.mse_curve.size());
    for (std::size_t n = 0; n < index.size(); ++n) index[n] = static_cast<double>(n);
    anc::write_csv({{"n", index}, {"mse", r.mse_curve}, {"mse_smoothed", r.mse_smoothed}}, dir / "mse.csv");

    std::vector<anc::CsvColumn> taps{{"n", {}}};
    for (std::size_t k = 0; k < resolved.taps; ++k) taps.push_back({"h" + std::to_string(k), {}});
    for (const auto& snap : r.coeff_trajectory) {
        taps[0].values.push_back(static_cast<double>(snap.sample));
        for (std::size_t k = 0; k < snap.taps.size(); ++k) taps[k + 1].values.push_back(snap.taps[k]);
    }
    anc::write_csv(taps, dir / "taps.csv");
    write_provenance(dir, common, anc::describe(resolved) + "\n" + sc.provenance);

    std::cout << "algo=" << anc::display_name(algo) << " M=" << resolved.taps << " snr_in=" << fmt_opt(r.snr_in)
              << " snr_out=" << fmt_opt(r.snr_out) << " snri=" << fmt_opt(r.snri) << '\n';
    return 0;
}

int cmd_sweep(const FilterFlags& f, const ScenarioFlags& s, const Common& common, const std::string& param_name,
              const std::string& values_text, const std::string& range_text) {
    const auto param = anc::parse_sweep_param(param_name);
    if (!param) throw UsageError("unknown sweep parameter '" + param_name + "' (valid: m, l, mu, p)");
    const anc::Algorithm algo = require_algorithm(f.algo);
    if (values_text.empty() == range_text.empty()) throw UsageError("give exactly one of --values or --range");
    const std::vector<double> values =
        values_text.empty() ? parse_range(range_text) : parse_list(values_text, "--values");
    if (values.empty()) throw UsageError("sweep value list is empty");

    const anc::AlgoConfig base = to_config(f, algo, common.seed);
    LoadedScenario sc = load_scenario(s, common.seed);
    if (!sc.clean) throw UsageError("sweep requires --clean");
    const fs::path dir = prepare_out(common.out);

    const anc::AncScenario scenario{*sc.clean, sc.primary, sc.reference};
    const auto rows = anc::sweep(base, *param, values, scenario, common.threads);

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        cells.push_back({anc::format_number(row.value), row.snri ? anc::format_number(*row.snri) : "nan",
                         row.snr_out ? anc::format_number(*row.snr_out) : "nan"});
        if (!row.error.empty()) {
            std::cerr << "warning: " << param_name << "=" << anc::format_number(row.value) << ": " << row.error << '\n';
        }
    }
    anc::write_csv_rows({"param_value", "snri", "snr_out"}, cells, dir / "sweep.csv");
    write_provenance(dir, common, "param=" + param_name + "\n" + sc.provenance);

    if (const auto best = anc::best_row(rows)) {
        const auto& row = rows[*best];
        std::cout << "best " << param_name << "=" << anc::format_number(row.value)
                  << " snri=" << anc::format_number(*row.snri) << " snr_out=" << anc::format_number(*row.snr_out)
                  << '\n';
        return 0;
    }
    std::cerr << "error: every sweep row failed\n";
    return kExitUsage;
}

int cmd_synth(const ScenarioFlags& s, const Common& common) {
    const anc::SynthSpec spec = to_synth_spec(s, common.seed);
    const anc::AncScenario scenario = anc::synth_anc_scenario(spec);
    const fs::path dir = prepare_out(common.out);
    anc::write_wav(scenario.clean, dir / "clean.wav");
    anc::write_wav(scenario.primary, dir / "primary.wav");
    anc::write_wav(scenario.reference, dir / "reference.wav");
    anc::write_text_atomic("command=" + command_line(common.argv) + "\n" + describe_spec(spec, s.channel),
                           dir / "spec.txt");
    std::cout << "snr_in=" << anc::format_number(anc::snr_db(scenario.clean, scenario.primary)) << '\n';
    return 0;
}

int cmd_compare(const FilterFlags& f, const ScenarioFlags& s, const Common& common) {
    if (!s.primary.empty() && s.clean.empty()) throw UsageError("compare requires --clean");
    const LoadedScenario sc = load_scenario(s, common.seed);
    if (!sc.clean) throw UsageError("compare requires --clean");
    const fs::path dir = prepare_out(common.out);

    struct Row {
        std::string name;
        std::optional<double> snri;
        std::string failure;
    };
    std::vector<Row> rows;
    std::string configs;
    std::vector<anc::AlgoConfig> configs_to_run;
    for (anc::Algorithm algo : anc::kAllAlgorithms) {
        anc::AlgoConfig c;
        c.algorithm = algo;
        c.taps = f.m;
        c.seed = common.seed;
        configs_to_run.push_back(c);
        configs += anc::describe(anc::resolve(c)) + "\n";
        rows.push_back({anc::display_name(algo), std::nullopt, {}});
    }

    auto run_one = [&](std::size_t i) {
        try {
            rows[i].snri = anc::run_anc(configs_to_run[i], sc.primary, sc.reference, &*sc.clean).snri;
        } catch (const anc::DivergenceError&) {
            rows[i].failure = "diverged";
        } catch (const anc::Error& e) {
            rows[i].failure = "failed";
            std::cerr << "warning: " << rows[i].name << ": " << e.what() << '\n';
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(common.threads, static_cast<unsigned>(rows.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < rows.size(); i += workers) run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<std::vector<std::string>> cells;
    bool any = false;
    for (const auto& row : rows) {
        any = any || row.snri.has_value();
        cells.push_back({row.name, row.snri ? anc::format_number(*row.snri) : row.failure});
    }
    anc::write_csv_rows({"algorithm", "snri"}, cells, dir / "table.csv");
    write_provenance(dir, common, configs + sc.provenance);

    std::cout << "algorithm,snri\n";
    for (const auto& c : cells) std::cout << c[0] << ',' << c[1] << '\n';
    return any ? 0 : kExitDiverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive noise cancellation with LMS, NLMS, AP, RLS, FEDS and FAP filters"};
    app.require_subcommand(1);

    Common common;
    common.argv.assign(argv, argv + argc);
    FilterFlags filter;
    ScenarioFlags scenario;
    std::string param, values, range;

    auto* run = app.add_subcommand("run", "denoise one primary/reference pair");
    add_filter_flags(run, filter, true);
    add_scenario_flags(run, scenario, true);

    auto* sweep = app.add_subcommand("sweep", "SNRI as a function of one parameter");
    add_filter_flags(sweep, filter, true);
    add_scenario_flags(sweep, scenario, true);
    sweep->add_option("--param", param, "m | l | mu | p")->required();
    sweep->add_option("--values", values, "comma-separated values");
    sweep->add_option("--range", range, "start:stop[:step], inclusive");
    sweep->add_option("--threads", common.threads, "concurrent runs");

    auto* synth = app.add_subcommand("synth", "generate a synthetic clean/primary/reference triple");
    add_scenario_flags(synth, scenario, false);

    auto* compare = app.add_subcommand("compare", "run all six algorithms at their default parameters");
    compare->add_option("--m", filter.m, "filter taps M");
    add_scenario_flags(compare, scenario, true);
    compare->add_option("--threads", common.threads, "concurrent runs");

    for (auto* sub : {run, sweep, synth, compare}) {
        sub->add_option("--out", common.out, "output directory")->required();
        sub->add_option("--seed", common.seed, "synthetic scenario seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) return cmd_run(filter, scenario, common);
        if (*sweep) return cmd_sweep(filter, scenario, common, param, values, range);
        if (*synth) return cmd_synth(scenario, common);
        if (*compare) return cmd_compare(filter, scenario, common);
    } catch (const anc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const anc::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const anc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
