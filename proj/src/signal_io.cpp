#include "anc/signal_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>

#include "anc/error.hpp"

namespace anc {

namespace fs = std::filesystem;

void validate(const Signal& signal) {
    if (signal.samples.empty()) throw ConfigError("empty signal");
    if (signal.sample_rate <= 0) throw ConfigError("sample rate must be positive");
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        if (!std::isfinite(signal.samples[i])) {
            throw ConfigError("non-finite sample at index " + std::to_string(i));
        }
    }
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

[[noreturn]] void malformed(const fs::path& path, const std::string& why) {
    throw IoError(IoErrorKind::malformed, path.string(), "malformed WAV '" + path.string() + "': " + why);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

Signal read_wav(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(IoErrorKind::missing_file, path.string(), "cannot open '" + path.string() + "'");
    }
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
        std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
        malformed(path, "missing RIFF/WAVE header");
    }

    bool have_fmt = false;
    std::uint16_t channels = 0;
    std::uint16_t bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
        const std::size_t size = read_u32(&bytes[pos + 4]);
        const std::size_t body = pos + 8;
        const std::size_t avail = std::min(size, bytes.size() - body);
        if (id == "fmt ") {
            if (avail < 16) malformed(path, "short fmt chunk");
            std::uint16_t format = read_u16(&bytes[body]);
            channels = read_u16(&bytes[body + 2]);
            rate = read_u32(&bytes[body + 4]);
            bits = read_u16(&bytes[body + 14]);
            if (format == kFormatExtensible && avail >= 26) format = read_u16(&bytes[body + 24]);
            if (format != kFormatPcm) malformed(path, "not PCM (format tag " + std::to_string(format) + ")");
            have_fmt = true;
        } else if (id == "data") {
            data = &bytes[body];
            data_size = avail;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt) malformed(path, "no fmt chunk");
    if (channels != 1) {
        throw IoError(IoErrorKind::non_mono, path.string(),
                      "non-mono WAV '" + path.string() + "' (" + std::to_string(channels) + " channels)");
    }
    if (bits != 16) {
        throw IoError(IoErrorKind::unsupported_bit_depth, path.string(),
                      "unsupported bit depth " + std::to_string(bits) + " in '" + path.string() + "'");
    }
    if (data == nullptr) malformed(path, "no data chunk");
    if (rate == 0) malformed(path, "zero sample rate");

    Signal signal;
    signal.sample_rate = static_cast<int>(rate);
    signal.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(data + 2 * i));
        signal.samples[i] = raw / 32768.0;
    }
    return signal;
}

std::int16_t to_pcm16(double value) noexcept {
    const double scaled = std::nearbyint(value * 32768.0);
    return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

WavWriteReport write_wav(const Signal& signal, const fs::path& path) {
    if (signal.samples.empty()) {
        throw IoError(IoErrorKind::empty_signal, path.string(), "empty signal");
    }
    validate(signal);

    WavWriteReport report;
    const auto n = static_cast<std::uint32_t>(signal.samples.size());
    std::string out;
    out.reserve(44 + 2 * std::size_t{n});
    out += "RIFF";
    put_u32(out, 36 + 2 * n);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, 2 * n);
    for (double v : signal.samples) {
        if (v >= 1.0 || v < -1.0) ++report.clipped;
        put_u16(out, static_cast<std::uint16_t>(to_pcm16(v)));
    }
    write_text_atomic(out, path);
    return report;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.12g", value);
    return buf.data();
}

void write_text_atomic(const std::string& contents, const fs::path& path) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(IoErrorKind::unwritable_path, path.string(), "cannot write '" + path.string() + "'");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError(IoErrorKind::unwritable_path, path.string(), "write failed for '" + path.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError(IoErrorKind::unwritable_path, path.string(), "cannot rename into '" + path.string() + "'");
    }
}

void write_csv_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                    const fs::path& path) {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw IoError(IoErrorKind::ragged_columns, path.string(), "row width does not match header");
        }
        append_row(row);
    }
    write_text_atomic(out, path);
}

void write_csv(const std::vector<CsvColumn>& table, const fs::path& path) {
    std::vector<std::string> header;
    const std::size_t rows = table.empty() ? 0 : table.front().values.size();
    for (const auto& col : table) {
        if (col.values.size() != rows) {
            throw IoError(IoErrorKind::ragged_columns, path.string(),
                          "ragged columns: '" + col.name + "' has " + std::to_string(col.values.size()) +
                              " rows, expected " + std::to_string(rows));
        }
        header.push_back(col.name);
    }
    std::vector<std::vector<std::string>> cells(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        cells[r].reserve(table.size());
        for (const auto& col : table) cells[r].push_back(format_number(col.values[r]));
    }
    write_csv_rows(header, cells, path);
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::white ? "white" : "ar1";
}

std::string to_string(CleanKind kind) {
    return kind == CleanKind::sine_mix ? "sine_mix" : "ar2";
}

void validate(const SynthSpec& spec) {
    if (spec.channel_taps.empty()) throw ConfigError("channel needs at least one tap");
    bool nonzero = false;
    for (double t : spec.channel_taps) {
        if (!std::isfinite(t)) throw ConfigError("channel taps must be finite");
        nonzero = nonzero || t != 0.0;
    }
    if (!nonzero) throw ConfigError("channel needs at least one nonzero tap");
    if (spec.num_samples < 1) throw ConfigError("num_samples must be at least 1");
    if (spec.noise_kind == NoiseKind::ar1 && !(std::abs(spec.noise_rho) < 1.0)) {
        throw ConfigError("ar1 noise requires |rho| < 1");
    }
    if (!std::isfinite(spec.input_snr_db)) throw ConfigError("input SNR must be finite");
    if (!(spec.peak_level > 0.0 && spec.peak_level <= 1.0)) throw ConfigError("peak level must be in (0, 1]");
    if (spec.sample_rate <= 0) throw ConfigError("sample rate must be positive");
}

std::vector<double> fir_filter(const std::vector<double>& taps, const std::vector<double>& input) {
    std::vector<double> out(input.size(), 0.0);
    for (std::size_t n = 0; n < input.size(); ++n) {
        double acc = 0.0;
        const std::size_t reach = std::min(taps.size(), n + 1);
        for (std::size_t k = 0; k < reach; ++k) acc += taps[k] * input[n - k];
        out[n] = acc;
    }
    return out;
}

std::vector<double> default_channel(std::size_t order) {
    std::vector<double> taps(order);
    for (std::size_t k = 0; k < order; ++k) {
        taps[k] = std::pow(-0.85, static_cast<double>(k));
    }
    return taps;
}

namespace {

double power(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc / static_cast<double>(v.size());
}

std::vector<double> make_noise(const SynthSpec& spec, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(spec.num_samples);
    if (spec.noise_kind == NoiseKind::white) {
        for (double& v : noise) v = gauss(rng);
        return noise;
    }
    const double rho = spec.noise_rho;
    const double drive = std::sqrt(1.0 - rho * rho);
    double prev = gauss(rng);  // stationary start
    for (double& v : noise) {
        prev = rho * prev + drive * gauss(rng);
        v = prev;
    }
    return noise;
}

std::vector<double> make_clean(const SynthSpec& spec, std::mt19937_64& rng) {
    std::vector<double> clean(spec.num_samples);
    if (spec.clean_kind == CleanKind::sine_mix) {
        constexpr std::array<double, 3> freq{0.0275, 0.0625, 0.11};  // cycles per sample
        constexpr std::array<double, 3> amp{1.0, 0.7, 0.4};
        constexpr std::array<double, 3> phase{0.0, 1.1, 2.3};
        for (std::size_t n = 0; n < clean.size(); ++n) {
            double acc = 0.0;
            for (std::size_t i = 0; i < freq.size(); ++i) {
                acc += amp[i] * std::sin(2.0 * std::numbers::pi * freq[i] * static_cast<double>(n) + phase[i]);
            }
            clean[n] = acc;
        }
        return clean;
    }
    // Poles at 0.95 exp(+-j pi/8).
    const double a1 = 2.0 * 0.95 * std::cos(std::numbers::pi / 8.0);
    const double a2 = -0.95 * 0.95;
    std::normal_distribution<double> gauss(0.0, 1.0);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t burn = 0; burn < 500; ++burn) {
        const double s = a1 * s1 + a2 * s2 + gauss(rng);
        s2 = s1;
        s1 = s;
    }
    for (double& v : clean) {
        const double s = a1 * s1 + a2 * s2 + gauss(rng);
        s2 = s1;
        s1 = s;
        v = s;
    }
    return clean;
}

}  // namespace

AncScenario synth_anc_scenario(const SynthSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::vector<double> clean = make_clean(spec, rng);
    std::vector<double> noise = make_noise(spec, rng);

    // Scale the raw noise so that the channel output hits the requested SNR.
    const std::vector<double> shaped = fir_filter(spec.channel_taps, noise);
    const double clean_power = power(clean);
    const double shaped_power = power(shaped);
    double noise_gain = 0.0;
    if (shaped_power > 0.0 && clean_power > 0.0) {
        noise_gain = std::sqrt(clean_power / shaped_power * std::pow(10.0, -spec.input_snr_db / 10.0));
    }
    for (double& v : noise) v *= noise_gain;

    std::vector<double> noise_in_primary = fir_filter(spec.channel_taps, noise);
    double peak = 0.0;
    for (std::size_t n = 0; n < clean.size(); ++n) {
        peak = std::max({peak, std::abs(clean[n]), std::abs(noise[n]), std::abs(clean[n] + noise_in_primary[n])});
    }
    const double gain = peak > 0.0 ? spec.peak_level / peak : 1.0;
    for (double& v : clean) v *= gain;
    for (double& v : noise) v *= gain;
    noise_in_primary = fir_filter(spec.channel_taps, noise);

    AncScenario out;
    out.clean.sample_rate = out.primary.sample_rate = out.reference.sample_rate = spec.sample_rate;
    out.primary.samples.resize(clean.size());
    for (std::size_t n = 0; n < clean.size(); ++n) out.primary.samples[n] = clean[n] + noise_in_primary[n];
    out.clean.samples = std::move(clean);
    out.reference.samples = std::move(noise);
    return out;
}

}  // namespace anc
