#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snrsub {

/// Error carrying a stable machine-readable code, used for everything the
/// CLI reports back as structured JSON.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// Uniformly sampled real-valued observations.
///
/// Estimation maps sample i (1-based) of a window of length n onto the
/// logical time i/n in (0, 1]; the sample rate only matters for unit
/// conversions (milliseconds to samples, frequencies).
class TimeSeries {
public:
  TimeSeries(std::vector<double> samples, double sample_rate_hz);

  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] double sample_rate_hz() const noexcept { return sample_rate_; }
  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return samples_[i]; }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

private:
  std::vector<double> samples_;
  double sample_rate_;
};

/// Short- or long-range dependence of the noise. Regimes are declared by the
/// caller, never estimated.
struct DependenceRegime {
  enum class Kind { SRD, LRD };

  Kind kind = Kind::SRD;
  double gamma1 = 1.0; // only meaningful for LRD, in (0, 1]

  static DependenceRegime srd() { return {Kind::SRD, 1.0}; }
  static DependenceRegime lrd(double gamma1);

  [[nodiscard]] bool is_lrd() const noexcept { return kind == Kind::LRD; }
};

/// Ratio in decibels.
struct SnrDb {
  double value = 0.0;

  friend bool operator==(SnrDb, SnrDb) = default;
  friend auto operator<=>(SnrDb, SnrDb) = default;
};

/// Probability level strictly inside (0, 1).
class QuantileLevel {
public:
  explicit QuantileLevel(double gamma2);

  [[nodiscard]] double value() const noexcept { return gamma2_; }

private:
  double gamma2_;
};

/// 10 log10(p_signal / p_noise). Throws std::domain_error on non-positive
/// powers.
[[nodiscard]] SnrDb snr_db(double p_signal, double p_noise);

/// Effective sample size scaling: n (SRD), n / ln n (LRD, gamma1 = 1),
/// n^gamma1 (LRD, 0 < gamma1 < 1).
[[nodiscard]] double lambda_n(std::size_t n, const DependenceRegime& regime);

/// Convergence rate of the centred variance and SNR statistics.
[[nodiscard]] double tau_n(std::size_t n, const DependenceRegime& regime);

/// Lower (type-1) empirical quantile: the smallest value x with
/// F_hat(x) >= level, i.e. the ceil(level * K)-th order statistic.
[[nodiscard]] double empirical_quantile(std::span<const double> values, QuantileLevel level);

/// Same as empirical_quantile but for input that is already sorted ascending.
[[nodiscard]] double sorted_quantile(std::span<const double> sorted, QuantileLevel level);

/// Mean of squared values.
[[nodiscard]] double signal_power(std::span<const double> signal_values);

/// Two-pass population variance (1/n normalisation).
[[nodiscard]] double population_variance(std::span<const double> values);

} // namespace snrsub
