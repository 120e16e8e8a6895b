#include "snrsub/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace snrsub {

namespace {

static_assert(std::endian::native == std::endian::little,
              "raw and wav I/O assume a little-endian host");

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_open", "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class T>
T read_le(const std::vector<char>& bytes, std::size_t offset) {
  T v{};
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double require_rate(const InputDescriptor& desc) {
  if (!desc.sample_rate_hz) {
    throw Error("missing_sample_rate", "--fs is required for " +
                                           std::string(to_string(desc.format)) + " input");
  }
  return *desc.sample_rate_hz;
}

TimeSeries read_wav16(const InputDescriptor& desc) {
  const auto bytes = slurp(desc.path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("wav_header", "not a RIFF/WAVE file");
  }

  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id(bytes.data() + pos, 4);
    const auto size = read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size()) throw Error("wav_header", "truncated fmt chunk");
      format_tag = read_le<std::uint16_t>(bytes, body);
      channels = read_le<std::uint16_t>(bytes, body + 2);
      rate = read_le<std::uint32_t>(bytes, body + 4);
      bits = read_le<std::uint16_t>(bytes, body + 14);
      if (format_tag == 0xFFFE && size >= 26) {
        format_tag = read_le<std::uint16_t>(bytes, body + 24); // WAVE_FORMAT_EXTENSIBLE subformat
      }
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt || !have_data) throw Error("wav_header", "missing fmt or data chunk");
  if (format_tag != 1 || bits != 16) {
    throw Error("wav_unsupported", "only PCM 16-bit WAV is supported (format " +
                                       std::to_string(format_tag) + ", " + std::to_string(bits) +
                                       " bits)");
  }
  if (channels == 0) throw Error("wav_header", "WAV declares zero channels");
  if (desc.channel >= channels) {
    throw Error("wav_channel", "channel " + std::to_string(desc.channel) + " requested but file has " +
                                   std::to_string(channels));
  }

  const std::size_t frame = 2U * channels;
  const std::size_t frames = data_size / frame;
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto v = read_le<std::int16_t>(bytes, data_offset + i * frame + 2U * desc.channel);
    samples[i] = static_cast<double>(v) / 32768.0;
  }
  if (samples.empty()) throw Error("empty_series", "WAV file contains no samples");
  return TimeSeries(std::move(samples), desc.sample_rate_hz.value_or(static_cast<double>(rate)));
}

TimeSeries read_csv(const InputDescriptor& desc) {
  const double rate = require_rate(desc);
  std::ifstream in(desc.path);
  if (!in) throw Error("io_open", "cannot open '" + desc.path.string() + "'");

  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.rfind(',');
    const std::string_view cell = comma == std::string_view::npos ? row : row.substr(comma + 1);
    const auto value = parse_number(cell);
    if (!value) {
      if (first_content) {
        first_content = false; // header row
        continue;
      }
      throw Error("csv_parse", "line " + std::to_string(line_no) + ": non-numeric value '" +
                                   std::string(trim(cell)) + "'");
    }
    first_content = false;
    samples.push_back(*value);
  }
  if (samples.empty()) throw Error("empty_series", "CSV file contains no samples");
  return TimeSeries(std::move(samples), rate);
}

TimeSeries read_raw(const InputDescriptor& desc) {
  const double rate = require_rate(desc);
  RawFileReader reader(desc.path);
  if (reader.size() == 0) throw Error("empty_series", "raw file contains no samples");
  std::vector<double> samples(reader.size());
  reader.read(0, samples);
  return TimeSeries(std::move(samples), rate);
}

} // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "wav16" || name == "wav") return InputFormat::Wav16;
  if (name == "csv") return InputFormat::Csv;
  if (name == "raw_f64le" || name == "raw") return InputFormat::RawF64Le;
  throw Error("bad_format", "unknown input format '" + std::string(name) +
                                "' (expected wav16, csv or raw_f64le)");
}

std::string_view to_string(InputFormat format) {
  switch (format) {
  case InputFormat::Wav16: return "wav16";
  case InputFormat::Csv: return "csv";
  case InputFormat::RawF64Le: return "raw_f64le";
  }
  return "unknown";
}

TimeSeries read_input(const InputDescriptor& desc) {
  if (desc.sample_rate_hz && !(*desc.sample_rate_hz > 0.0)) {
    throw Error("bad_sample_rate", "sample rate must be positive");
  }
  switch (desc.format) {
  case InputFormat::Wav16: return read_wav16(desc);
  case InputFormat::Csv: return read_csv(desc);
  case InputFormat::RawF64Le: return read_raw(desc);
  }
  throw Error("bad_format", "unsupported input format");
}

void write_raw_f64le(const std::filesystem::path& path, std::span<const double> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_write", "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size_bytes()));
  if (!out) throw Error("io_write", "short write to '" + path.string() + "'");
}

void write_wav16(const std::filesystem::path& path, std::span<const double> samples,
                 std::uint32_t sample_rate_hz, double gain) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_write", "cannot write '" + path.string() + "'");

  auto put16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };

  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(16);
  put16(1); // PCM
  put16(1); // mono
  put32(sample_rate_hz);
  put32(sample_rate_hz * 2);
  put16(2);
  put16(16);
  out.write("data", 4);
  put32(data_bytes);
  for (double s : samples) {
    const double scaled = std::round(s * gain * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    out.write(reinterpret_cast<const char*>(&v), 2);
  }
  if (!out) throw Error("io_write", "short write to '" + path.string() + "'");
}

RawFileReader::RawFileReader(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path_, ec);
  if (ec) throw Error("io_open", "cannot open '" + path_.string() + "'");
  if (bytes % sizeof(double) != 0) {
    throw Error("raw_size", "raw file size is not a multiple of 8 bytes");
  }
  count_ = static_cast<std::size_t>(bytes / sizeof(double));
}

void RawFileReader::read(std::size_t start, std::span<double> out) const {
  if (start + out.size() > count_) throw Error("io_read", "read past the end of the raw file");
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error("io_open", "cannot open '" + path_.string() + "'");
  in.seekg(static_cast<std::streamoff>(start * sizeof(double)));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()));
  if (!in) throw Error("io_read", "short read from '" + path_.string() + "'");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw Error("non_finite_sample", "sample " + std::to_string(start + i) + " is not finite");
    }
  }
}

BlockReader RawFileReader::block_reader() const {
  return [this](std::size_t start, std::span<double> out) { read(start, out); };
}

} // namespace snrsub
