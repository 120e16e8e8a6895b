#include "snrsub/io.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

using namespace snrsub;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "snrsub_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

void put16(std::ofstream& f, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<const char*>(b), 2);
}

void put32(std::ofstream& f, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    const char c = static_cast<char>((v >> (8 * i)) & 0xff);
    f.write(&c, 1);
  }
}

/// Stereo PCM16 file with an extra chunk before "data".
void write_stereo(const fs::path& p, const std::vector<std::int16_t>& left,
                  const std::vector<std::int16_t>& right) {
  std::ofstream f(p, std::ios::binary);
  const auto frames = static_cast<std::uint32_t>(left.size());
  f.write("RIFF", 4);
  put32(f, 4 + 8 + 16 + 8 + 4 + 8 + frames * 4);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put32(f, 16);
  put16(f, 1);
  put16(f, 2);
  put32(f, 8000);
  put32(f, 8000 * 4);
  put16(f, 4);
  put16(f, 16);
  f.write("LIST", 4);
  put32(f, 4);
  f.write("abcd", 4);
  f.write("data", 4);
  put32(f, frames * 4);
  for (std::size_t i = 0; i < left.size(); ++i) {
    put16(f, static_cast<std::uint16_t>(left[i]));
    put16(f, static_cast<std::uint16_t>(right[i]));
  }
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("format names") {
  CHECK(parse_input_format("wav16") == InputFormat::Wav16);
  CHECK(parse_input_format("csv") == InputFormat::Csv);
  CHECK(parse_input_format("raw_f64le") == InputFormat::RawF64Le);
  CHECK_THROWS_AS((void)parse_input_format("mp3"), Error);
}

TEST_CASE("raw round trip and lazy reads") {
  const auto p = temp_path("x.raw");
  const std::vector<double> v{0.5, -1.25, 3.0, 1e-300, -7.0};
  write_raw_f64le(p, v);
  const auto ts = read_input({p, InputFormat::RawF64Le, 10.0, 0});
  CHECK(std::equal(v.begin(), v.end(), ts.samples().begin()));
  RawFileReader reader(p);
  CHECK(reader.size() == 5);
  std::vector<double> mid(2);
  reader.read(2, mid);
  CHECK(mid == std::vector<double>{3.0, 1e-300});
  CHECK_THROWS(reader.read(4, mid));
  CHECK_THROWS_AS((void)read_input({p, InputFormat::RawF64Le, std::nullopt, 0}), Error);
}

TEST_CASE("wav16 round trip") {
  const auto p = temp_path("x.wav");
  const std::vector<double> v{0.0, 0.5, -0.5, 0.999, -1.0};
  write_wav16(p, v, 44100);
  const auto ts = read_input({p, InputFormat::Wav16, std::nullopt, 0});
  CHECK(ts.sample_rate_hz() == 44100.0);
  REQUIRE(ts.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(ts[i] == doctest::Approx(v[i]).epsilon(1e-4));
  // The gain is applied before quantisation; out-of-range values clamp.
  write_wav16(p, v, 44100, 2.0);
  const auto loud = read_input({p, InputFormat::Wav16, std::nullopt, 0});
  CHECK(loud[1] == doctest::Approx(32767.0 / 32768.0));
  CHECK(loud[4] == -1.0);
}

TEST_CASE("wav channel selection and chunk skipping") {
  const auto p = temp_path("stereo.wav");
  write_stereo(p, {100, 200, 300}, {-1, -2, -3});
  const auto left = read_input({p, InputFormat::Wav16, std::nullopt, 0});
  const auto right = read_input({p, InputFormat::Wav16, std::nullopt, 1});
  CHECK(left.sample_rate_hz() == 8000.0);
  CHECK(left[2] == 300.0 / 32768.0);
  CHECK(right[0] == -1.0 / 32768.0);
  CHECK_THROWS_AS((void)read_input({p, InputFormat::Wav16, std::nullopt, 2}), Error);
  const auto overridden = read_input({p, InputFormat::Wav16, 256.0, 0});
  CHECK(overridden.sample_rate_hz() == 256.0);
}

TEST_CASE("malformed wav") {
  const auto p = temp_path("bad.wav");
  {
    std::ofstream f(p, std::ios::binary);
    f << "RIFX....WAVE";
  }
  CHECK_THROWS_AS((void)read_input({p, InputFormat::Wav16, std::nullopt, 0}), Error);
  CHECK_THROWS_AS((void)read_input({temp_path("missing.wav"), InputFormat::Wav16, std::nullopt, 0}),
                  Error);
}

TEST_CASE("csv input") {
  const auto p = temp_path("eeg.csv");
  {
    std::ofstream f(p);
    f << "time,channel\n0.0,1.5\n0.004,-2\n0.008,3e-1\n";
  }
  const auto ts = read_input({p, InputFormat::Csv, 256.0, 0});
  REQUIRE(ts.size() == 3);
  CHECK(ts[0] == 1.5);
  CHECK(ts[1] == -2.0);
  CHECK(ts[2] == 0.3);
  CHECK_THROWS_AS((void)read_input({p, InputFormat::Csv, std::nullopt, 0}), Error);

  const auto q = temp_path("single.csv");
  {
    std::ofstream f(q);
    f << "1\n2\n\n3\n";
  }
  CHECK(read_input({q, InputFormat::Csv, 1.0, 0}).size() == 3);

  const auto r = temp_path("broken.csv");
  {
    std::ofstream f(r);
    f << "1\nabc\n3\n";
  }
  try {
    (void)read_input({r, InputFormat::Csv, 1.0, 0});
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == "csv_parse");
  }
}

}
