#include "snrsub/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snrsub {

TimeSeries::TimeSeries(std::vector<double> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_(sample_rate_hz) {
  if (samples_.empty()) {
    throw Error("empty_series", "time series has no samples");
  }
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw Error("bad_sample_rate", "sample rate must be a positive finite number");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error("non_finite_sample", "sample " + std::to_string(i) + " is not finite");
    }
  }
}

DependenceRegime DependenceRegime::lrd(double gamma1) {
  if (!(gamma1 > 0.0 && gamma1 <= 1.0)) {
    throw std::invalid_argument("LRD regime requires 0 < gamma1 <= 1");
  }
  return {Kind::LRD, gamma1};
}

QuantileLevel::QuantileLevel(double gamma2) : gamma2_(gamma2) {
  if (!(gamma2 > 0.0 && gamma2 < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
}

SnrDb snr_db(double p_signal, double p_noise) {
  if (!(p_signal > 0.0) || !(p_noise > 0.0)) {
    throw std::domain_error("snr_db requires strictly positive powers");
  }
  return {10.0 * std::log10(p_signal / p_noise)};
}

double lambda_n(std::size_t n, const DependenceRegime& regime) {
  if (n < 2) throw std::invalid_argument("lambda_n requires n >= 2");
  const double nd = static_cast<double>(n);
  if (!regime.is_lrd()) return nd;
  if (regime.gamma1 == 1.0) return nd / std::log(nd);
  return std::pow(nd, regime.gamma1);
}

double tau_n(std::size_t n, const DependenceRegime& regime) {
  if (n < 2) throw std::invalid_argument("tau_n requires n >= 2");
  const double nd = static_cast<double>(n);
  if (!regime.is_lrd() || regime.gamma1 > 0.5) return std::sqrt(nd);
  if (regime.gamma1 == 0.5) return std::sqrt(nd / std::log(nd));
  return std::pow(nd, regime.gamma1);
}

double sorted_quantile(std::span<const double> sorted, QuantileLevel level) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double target = level.value() * static_cast<double>(sorted.size());
  // Products that land within rounding of an integer count as that integer,
  // so that e.g. 0.95 * 100 selects the 95th order statistic.
  auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double empirical_quantile(std::span<const double> values, QuantileLevel level) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantile input must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, level);
}

double signal_power(std::span<const double> signal_values) {
  if (signal_values.empty()) throw std::invalid_argument("signal_power of an empty sequence");
  double acc = 0.0;
  for (double v : signal_values) acc += v * v;
  return acc / static_cast<double>(signal_values.size());
}

double population_variance(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("variance of an empty sequence");
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / count;
}

} // namespace snrsub
