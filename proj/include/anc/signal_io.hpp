#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace anc {

/// A mono time series with its sample rate.
struct Signal {
    std::vector<double> samples;
    int sample_rate = 8000;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Throws ConfigError when the signal is empty or holds a non-finite sample.
void validate(const Signal& signal);

/// Reads a 16-bit PCM mono WAV file. Samples are mapped to [-1, 1) by
/// division by 32768.
Signal read_wav(const std::filesystem::path& path);

struct WavWriteReport {
    std::size_t clipped = 0;
};

/// Writes a 16-bit PCM mono WAV file. Values outside [-1, 1) are clipped and
/// counted. The file is written to a temporary sibling and renamed into place.
WavWriteReport write_wav(const Signal& signal, const std::filesystem::path& path);

/// Quantizes one sample the way write_wav does.
std::int16_t to_pcm16(double value) noexcept;

struct CsvColumn {
    std::string name;
    std::vector<double> values;
};

/// Formats a number the way CSV output does: 12 significant digits, shortest
/// of fixed or exponent notation.
std::string format_number(double value);

/// Header row of names, then one row per index. All columns must be the same
/// length.
void write_csv(const std::vector<CsvColumn>& table, const std::filesystem::path& path);

/// Same output contract for pre-formatted cells (used where a cell may hold a
/// status word instead of a number).
void write_csv_rows(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows,
                    const std::filesystem::path& path);

/// Writes `contents` to `path` through a temporary file and rename.
void write_text_atomic(const std::string& contents, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic noise-cancellation scenarios

enum class NoiseKind { white, ar1 };
enum class CleanKind { sine_mix, ar2 };

/// Channel with `order` taps, (-0.85)^k. Used when only an order is requested.
std::vector<double> default_channel(std::size_t order);

/// Defaults describe the reference scenario: strongly low-pass reference
/// noise through an 8-tap channel, primary at -10 dB SNR.
struct SynthSpec {
    std::vector<double> channel_taps = default_channel(8);
    std::size_t num_samples = 100000;
    NoiseKind noise_kind = NoiseKind::ar1;
    double noise_rho = 0.997;  // AR(1) pole, used when noise_kind == ar1
    CleanKind clean_kind = CleanKind::sine_mix;
    double input_snr_db = -10.0;
    double peak_level = 0.9;
    std::uint64_t seed = 1;
    int sample_rate = 8000;
};

void validate(const SynthSpec& spec);

struct AncScenario {
    Signal clean;
    Signal primary;
    Signal reference;
};

/// Generates clean speech stand-in s, reference noise n1, and primary
/// s + (taps * n1) at the requested input SNR. All three signals share one
/// gain so that the largest magnitude equals `peak_level`.
AncScenario synth_anc_scenario(const SynthSpec& spec);

/// Zero-prehistory FIR convolution truncated to the input length.
std::vector<double> fir_filter(const std::vector<double>& taps, const std::vector<double>& input);

std::string to_string(NoiseKind kind);
std::string to_string(CleanKind kind);

}  // namespace anc
