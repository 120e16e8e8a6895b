#include "snrsub/simgen.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace snrsub {

namespace {

constexpr std::size_t kAr1BurnIn = 1000;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_alloc(std::size_t count) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::size_t SignalSpec::sample_count() const {
  const double raw = duration_s * sample_rate_hz;
  const double rounded = std::round(raw);
  if (!(raw > 0.0) || std::abs(raw - rounded) > 1e-6 * std::max(1.0, raw) || rounded < 1.0) {
    throw Error("bad_duration", "duration * sample_rate must be a positive integer");
  }
  return static_cast<std::size_t>(rounded);
}

void SignalSpec::validate() const {
  if (!(sample_rate_hz > 0.0)) throw Error("bad_sample_rate", "sample rate must be positive");
  if (!(frequency_hz > 0.0)) throw Error("bad_frequency", "signal frequency must be positive");
  if (!(frequency_hz < sample_rate_hz / 2.0)) {
    throw Error("nyquist", "signal frequency must be below the Nyquist frequency");
  }
  if (!std::isfinite(amplitude)) throw Error("bad_amplitude", "amplitude must be finite");
  (void)sample_count();
}

double noise_variance(const NoiseSpec& spec) {
  return std::visit([](const auto& s) { return s.variance; }, spec);
}

void validate(const NoiseSpec& spec) {
  if (!(noise_variance(spec) > 0.0)) {
    throw Error("bad_noise", "noise variance must be positive");
  }
  if (const auto* ar = std::get_if<Ar1Noise>(&spec); ar && !(std::abs(ar->phi) < 1.0)) {
    throw Error("bad_noise", "AR(1) coefficient must satisfy |phi| < 1");
  }
  if (const auto* pl = std::get_if<PowerLawNoise>(&spec);
      pl && !(pl->beta >= 0.0 && pl->beta <= 1.0)) {
    throw Error("bad_noise", "power-law exponent must lie in [0, 1]");
  }
}

double calibrate_amplitude(SnrDb target, double noise_variance) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
  return std::sqrt(2.0 * noise_variance * std::pow(10.0, target.value / 10.0));
}

TimeSeries gen_sine(const SignalSpec& spec) {
  spec.validate();
  const std::size_t n = spec.sample_count();
  std::vector<double> s(n);
  const double omega = 2.0 * std::numbers::pi * spec.frequency_hz / spec.sample_rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = spec.amplitude * std::sin(omega * static_cast<double>(i));
  }
  return TimeSeries(std::move(s), spec.sample_rate_hz);
}

std::vector<double> gen_white(double variance, std::size_t n, std::uint64_t seed) {
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

std::vector<double> gen_ar1(double phi, double target_variance, std::size_t n,
                            std::uint64_t seed) {
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("AR(1) requires |phi| < 1");
  if (!(target_variance > 0.0)) throw std::invalid_argument("variance must be positive");
  if (n < 1) throw std::invalid_argument("gen_ar1 requires n >= 1");

  Rng rng(seed);
  std::normal_distribution<double> innovation(0.0, std::sqrt(target_variance * (1.0 - phi * phi)));
  double state = 0.0;
  for (std::size_t i = 0; i < kAr1BurnIn; ++i) state = phi * state + innovation(rng);

  std::vector<double> out(n);
  for (auto& v : out) {
    state = phi * state + innovation(rng);
    v = state;
  }
  return out;
}

std::vector<double> gen_powerlaw(double beta, double target_variance, std::size_t n,
                                 std::uint64_t seed) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(target_variance > 0.0)) throw std::invalid_argument("variance must be positive");
  if (n < 16) throw std::invalid_argument("gen_powerlaw requires n >= 16");

  const std::size_t bins = n / 2 + 1;
  auto spectrum = fftw_alloc<fftw_complex>(bins);
  auto series = fftw_alloc<double>(n);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  spectrum[0][0] = 0.0;
  spectrum[0][1] = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n);
    const double sd = std::sqrt(0.5 * std::pow(f, -beta));
    const double re = sd * normal(rng);
    const double im = sd * normal(rng);
    spectrum[k][0] = re;
    spectrum[k][1] = im;
  }
  if (n % 2 == 0) spectrum[n / 2][1] = 0.0;

  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum.get(), series.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<double> out(series.get(), series.get() + n);
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(n);
  for (auto& v : out) v -= mean;
  const double scale = std::sqrt(target_variance / population_variance(out));
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> gen_noise(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WhiteNoise>) {
          return gen_white(s.variance, n, seed);
        } else if constexpr (std::is_same_v<T, Ar1Noise>) {
          return gen_ar1(s.phi, s.variance, n, seed);
        } else {
          return gen_powerlaw(s.beta, s.variance, n, seed);
        }
      },
      spec);
}

std::string_view to_string(Design design) {
  switch (design) {
  case Design::AR: return "ar";
  case Design::P1: return "p1";
  case Design::P2: return "p2";
  case Design::SineOnly: return "sine-only";
  case Design::NoiseOnly: return "noise-only";
  }
  return "unknown";
}

Design parse_design(std::string_view name) {
  for (Design d : {Design::AR, Design::P1, Design::P2, Design::SineOnly, Design::NoiseOnly}) {
    if (name == to_string(d)) return d;
  }
  if (name == "AR") return Design::AR;
  if (name == "P1") return Design::P1;
  if (name == "P2") return Design::P2;
  throw Error("bad_design", "unknown design '" + std::string(name) +
                                "' (expected ar, p1, p2, sine-only or noise-only)");
}

NoiseSpec design_noise(Design design, double variance) {
  switch (design) {
  case Design::P1: return PowerLawNoise{0.2, variance};
  case Design::P2: return PowerLawNoise{0.6, variance};
  default: return Ar1Noise{-0.7, variance};
  }
}

DesignSample gen_design(const DesignParams& params, std::uint64_t seed) {
  SignalSpec sig{0.0, params.frequency_hz, params.sample_rate_hz, params.duration_s};
  switch (params.design) {
  case Design::SineOnly: sig.amplitude = params.sine_only_amplitude; break;
  case Design::NoiseOnly: sig.amplitude = 0.0; break;
  default: sig.amplitude = calibrate_amplitude(params.target_snr, params.noise_variance); break;
  }
  sig.validate();
  const std::size_t n = sig.sample_count();
  TimeSeries clean = gen_sine(sig);

  NoiseSpec noise_spec = design_noise(params.design, params.noise_variance);
  std::vector<double> noise;
  if (params.design == Design::SineOnly) {
    noise.assign(n, 0.0);
  } else {
    noise = gen_noise(noise_spec, n, derive_seed(seed, 0));
  }

  std::vector<double> signal(clean.samples().begin(), clean.samples().end());
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = signal[i] + noise[i];

  return DesignSample{TimeSeries(std::move(y), params.sample_rate_hz),
                      std::move(signal),
                      std::move(noise),
                      sig.amplitude,
                      params.design == Design::SineOnly ? 0.0 : params.noise_variance,
                      noise_spec};
}

} // namespace snrsub
