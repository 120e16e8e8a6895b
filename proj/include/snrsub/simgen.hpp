#pragma once

#include "snrsub/core.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace snrsub {

/// Derives an independent 64-bit stream seed from a master seed and a stream
/// counter (splitmix64 finaliser over both words). Streams are a pure function
/// of (master, stream), so replica order never matters.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

using Rng = std::mt19937_64;

struct SignalSpec {
  double amplitude = 1.0;
  double frequency_hz = 50.0;
  double sample_rate_hz = 44100.0;
  double duration_s = 1.0;

  /// Number of samples; throws unless duration * rate is a positive integer.
  [[nodiscard]] std::size_t sample_count() const;
  void validate() const;
};

struct WhiteNoise {
  double variance = 1.0;
};

struct Ar1Noise {
  double phi = -0.7;
  double variance = 1.0; // stationary variance; innovation sd is derived
};

struct PowerLawNoise {
  double beta = 0.2;
  double variance = 1.0;
};

using NoiseSpec = std::variant<WhiteNoise, Ar1Noise, PowerLawNoise>;

[[nodiscard]] double noise_variance(const NoiseSpec& spec);
void validate(const NoiseSpec& spec);

/// Sine amplitude giving (A^2 / 2) / noise_variance the requested SNR.
[[nodiscard]] double calibrate_amplitude(SnrDb target, double noise_variance);

/// s_i = A sin(2 pi f (i - 1) / Fs), i = 1..n.
[[nodiscard]] TimeSeries gen_sine(const SignalSpec& spec);

[[nodiscard]] std::vector<double> gen_white(double variance, std::size_t n, std::uint64_t seed);

/// Gaussian AR(1) with stationary variance `target_variance`. A 1000-sample
/// burn-in is generated and discarded.
[[nodiscard]] std::vector<double> gen_ar1(double phi, double target_variance, std::size_t n,
                                          std::uint64_t seed);

/// 1/f^beta noise by spectral synthesis: complex Gaussian Fourier
/// coefficients with variance proportional to f^-beta, zero DC, real Nyquist
/// bin, inverse real FFT, then an exact rescale so the sample mean is zero and
/// the (1/n) sample variance equals `target_variance`.
[[nodiscard]] std::vector<double> gen_powerlaw(double beta, double target_variance,
                                               std::size_t n, std::uint64_t seed);

[[nodiscard]] std::vector<double> gen_noise(const NoiseSpec& spec, std::size_t n,
                                            std::uint64_t seed);

/// Simulation designs: 50 Hz sine plus AR(1) (phi = -0.7), 1/f^0.2 or
/// 1/f^0.6 noise. SineOnly and NoiseOnly are degenerate variants used for
/// diagnostics; NoiseOnly uses AR(1) noise and a zero amplitude.
enum class Design { AR, P1, P2, SineOnly, NoiseOnly };

[[nodiscard]] std::string_view to_string(Design design);
[[nodiscard]] Design parse_design(std::string_view name);

/// Noise model behind a design, at the given variance.
[[nodiscard]] NoiseSpec design_noise(Design design, double variance);

struct DesignParams {
  Design design = Design::AR;
  SnrDb target_snr{10.0};
  double sample_rate_hz = 44100.0;
  double duration_s = 3.0;
  double frequency_hz = 50.0;
  double noise_variance = 1.0;
  double sine_only_amplitude = 1.0; // amplitude used by Design::SineOnly
};

/// A simulated series with its known components.
struct DesignSample {
  TimeSeries series;
  std::vector<double> signal;
  std::vector<double> noise;
  double amplitude = 0.0;
  double noise_variance = 0.0;
  NoiseSpec noise_spec;

  /// A^2 / 2.
  [[nodiscard]] double true_signal_power() const noexcept { return 0.5 * amplitude * amplitude; }
};

[[nodiscard]] DesignSample gen_design(const DesignParams& params, std::uint64_t seed);

} // namespace snrsub
