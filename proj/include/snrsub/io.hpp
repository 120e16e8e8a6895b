#pragma once

#include "snrsub/core.hpp"
#include "snrsub/subsample.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

namespace snrsub {

enum class InputFormat { Wav16, Csv, RawF64Le };

[[nodiscard]] InputFormat parse_input_format(std::string_view name);
[[nodiscard]] std::string_view to_string(InputFormat format);

struct InputDescriptor {
  std::filesystem::path path;
  InputFormat format = InputFormat::RawF64Le;
  /// Required for csv and raw input; overrides the header rate for wav.
  std::optional<double> sample_rate_hz;
  std::size_t channel = 0; // wav only
};

/// Loads a whole series.
///   wav16: RIFF/WAVE, PCM 16-bit only; sample / 32768, one channel selected.
///   csv:   optional header row; the last column of every row is the value.
///   raw:   little-endian IEEE-754 float64, no header.
/// Throws snrsub::Error with a descriptive code on malformed input.
[[nodiscard]] TimeSeries read_input(const InputDescriptor& desc);

void write_raw_f64le(const std::filesystem::path& path, std::span<const double> samples);

/// Writes mono PCM16. Samples are multiplied by `gain`, then scaled by 32768
/// and clamped to the int16 range.
void write_wav16(const std::filesystem::path& path, std::span<const double> samples,
                 std::uint32_t sample_rate_hz, double gain = 1.0);

/// Random-access reader over a raw float64 file that loads only the requested
/// ranges, so block estimation never reads the whole file.
class RawFileReader {
public:
  explicit RawFileReader(std::filesystem::path path);

  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  void read(std::size_t start, std::span<double> out) const;
  [[nodiscard]] BlockReader block_reader() const;

private:
  std::filesystem::path path_;
  std::size_t count_ = 0;
};

} // namespace snrsub
