#include "snrsub/smoother.hpp"

#include "snrsub/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snrsub {

namespace {

void check_fit_args(std::size_t n, double h) {
  if (n < 3) throw std::invalid_argument("kernel fit requires at least 3 samples");
  if (!(h > 0.0 && h <= 0.5)) throw std::invalid_argument("bandwidth must lie in (0, 0.5]");
}

/// Kernel weights by integer offset d = |j - i| on the uniform design.
void offset_weights(std::size_t n, double h, std::vector<double>& w) {
  const double nh = static_cast<double>(n) * h;
  const auto reach = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::floor(nh)));
  w.resize(reach + 1);
  for (std::size_t d = 0; d <= reach; ++d) w[d] = epanechnikov(static_cast<double>(d) / nh);
}

void fit_into(std::span<const double> y, double h, std::vector<double>& weights,
              std::vector<double>& out) {
  const std::size_t n = y.size();
  offset_weights(n, h, weights);
  const std::size_t reach = weights.size() - 1;
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t lo = j >= reach ? j - reach : 0;
    const std::size_t hi = std::min(n - 1, j + reach);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = lo; i <= j; ++i) {
      const double w = weights[j - i];
      num += w * y[i];
      den += w;
    }
    for (std::size_t i = j + 1; i <= hi; ++i) {
      const double w = weights[i - j];
      num += w * y[i];
      den += w;
    }
    out[j] = num / den;
  }
}

double correction_factor(std::span<const double> residuals, double h, std::size_t m_lags,
                         CvCorrection correction) {
  const std::size_t n = residuals.size();
  const double nh = static_cast<double>(n) * h;
  double weighted = epanechnikov(0.0);
  const double gamma0 = autocovariance(residuals, 0);
  if (correction == CvCorrection::Dependent && gamma0 > 0.0) {
    for (std::size_t j = 1; j <= m_lags; ++j) {
      const double k = epanechnikov(static_cast<double>(j) / nh);
      if (k == 0.0) break;
      weighted += 2.0 * k * autocovariance(residuals, j) / gamma0;
    }
  }
  return 1.0 - weighted / nh;
}

struct CvScratch {
  std::vector<double> weights;
  std::vector<double> fitted;
  std::vector<double> residuals;
};

double cv_with_scratch(std::span<const double> y, double h, std::size_t m_lags,
                       CvCorrection correction, CvScratch& scratch) {
  // With n h <= 1 only the point itself has positive weight, so the fit
  // interpolates the data and the residuals vanish.
  if (static_cast<double>(y.size()) * h <= 1.0) return std::numeric_limits<double>::infinity();
  fit_into(y, h, scratch.weights, scratch.fitted);
  const std::size_t n = y.size();
  scratch.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch.residuals[i] = y[i] - scratch.fitted[i];
  const double factor = correction_factor(scratch.residuals, h, m_lags, correction);
  if (!(factor >= kCvCorrectionGuard)) return std::numeric_limits<double>::infinity();
  return autocovariance(scratch.residuals, 0) / (factor * factor);
}

} // namespace

void BandwidthGrid::validate() const {
  if (!(c1 > 0.0) || !(c2 > c1)) throw std::invalid_argument("bandwidth grid requires 0 < c1 < c2");
  if (points < 2) throw std::invalid_argument("bandwidth grid requires at least 2 points");
}

std::vector<double> BandwidthGrid::values(std::size_t n, const DependenceRegime& regime) const {
  validate();
  const double scale = std::pow(lambda_n(n, regime), -0.2);
  const double lo = c1 * scale;
  const double ratio = c2 / c1;
  std::vector<double> hs;
  hs.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(points - 1);
    const double h = std::min(0.5, lo * std::pow(ratio, frac));
    if (hs.empty() || h > hs.back()) hs.push_back(h);
  }
  return hs;
}

double epanechnikov(double u) noexcept {
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

std::vector<double> priestley_chao_fit(std::span<const double> y, double h) {
  check_fit_args(y.size(), h);
  std::vector<double> weights;
  std::vector<double> out;
  fit_into(y, h, weights, out);
  return out;
}

double priestley_chao_at(std::span<const double> y, double h, double t) {
  check_fit_args(y.size(), h);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("evaluation point must lie in [0, 1]");
  const double n = static_cast<double>(y.size());
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::floor((t - h) * n)));
  const auto hi = static_cast<std::size_t>(std::min(n, std::ceil((t + h) * n)));
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double w = epanechnikov((t - static_cast<double>(i) / n) / h);
    num += w * y[i - 1];
    den += w;
  }
  if (!(den > 0.0)) throw std::domain_error("kernel weights vanish at the evaluation point");
  return num / den;
}

double autocovariance(std::span<const double> residuals, std::size_t j) {
  const std::size_t n = residuals.size();
  if (j >= n) throw std::invalid_argument("autocovariance lag must be smaller than n");
  double acc = 0.0;
  for (std::size_t t = 0; t + j < n; ++t) acc += residuals[t] * residuals[t + j];
  return acc / static_cast<double>(n);
}

std::size_t cv_lag_count(std::size_t n, double h) {
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n) * h)));
  return std::min(std::max<std::size_t>(1, root), std::max<std::size_t>(1, n / 4));
}

double cv_objective(std::span<const double> y, double h, std::size_t m_lags,
                    CvCorrection correction) {
  check_fit_args(y.size(), h);
  if (m_lags < 1 || m_lags > y.size() / 4) {
    throw std::invalid_argument("CV lag cutoff must satisfy 1 <= M <= n/4");
  }
  CvScratch scratch;
  return cv_with_scratch(y, h, m_lags, correction, scratch);
}

KernelFit select_bandwidth(std::span<const double> y, std::optional<DependenceRegime> regime_hint,
                           const BandwidthGrid& grid, CvCorrection correction) {
  const std::size_t n = y.size();
  if (n < 16) throw std::invalid_argument("bandwidth selection requires at least 16 samples");
  const auto hs = grid.values(n, regime_hint.value_or(DependenceRegime::srd()));

  KernelFit result;
  result.cv_curve.reserve(hs.size());
  CvScratch scratch;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = hs.size();
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const std::size_t m = cv_lag_count(n, hs[k]);
    const double cv = cv_with_scratch(y, hs[k], m, correction, scratch);
    result.cv_curve.push_back({hs[k], cv, m});
    if (cv < best) {
      best = cv;
      best_index = k;
    }
  }
  if (best_index == hs.size()) {
    throw Error("cv_degenerate", "correction factor degenerate across grid");
  }

  result.h_hat = hs[best_index];
  result.m_lags = result.cv_curve[best_index].m_lags;
  fit_into(y, result.h_hat, scratch.weights, result.fitted);
  result.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.residuals[i] = y[i] - result.fitted[i];
  return result;
}

KernelFit fit_with_bandwidth(std::span<const double> y, double h) {
  KernelFit result;
  result.fitted = priestley_chao_fit(y, h);
  result.h_hat = h;
  result.m_lags = cv_lag_count(y.size(), h);
  result.residuals.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) result.residuals[i] = y[i] - result.fitted[i];
  return result;
}

std::vector<MiseRow> mise_probe(const std::function<double(double)>& s_true,
                                const NoiseSpec& noise, std::span<const std::size_t> n_list,
                                std::size_t replicas, std::uint64_t seed, unsigned threads) {
  if (replicas < 10) throw std::invalid_argument("mise_probe requires at least 10 replicas");
  validate(noise);
  const BandwidthGrid grid;
  std::vector<MiseRow> rows;
  for (std::size_t n : n_list) {
    std::vector<double> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = s_true(static_cast<double>(i + 1) / static_cast<double>(n));
    }
    std::vector<double> ise(replicas);
    std::vector<double> hs(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
      auto y = gen_noise(noise, n, derive_seed(seed, (static_cast<std::uint64_t>(n) << 20) + r));
      for (std::size_t i = 0; i < n; ++i) y[i] += truth[i];
      const KernelFit fit = select_bandwidth(y, std::nullopt, grid);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n);
        if (t > fit.h_hat && t < 1.0 - fit.h_hat) {
          const double e = fit.fitted[i] - truth[i];
          acc += e * e;
        }
      }
      ise[r] = acc / static_cast<double>(n);
      hs[r] = fit.h_hat;
    });

    MiseRow row;
    row.n = n;
    row.replicas = replicas;
    for (std::size_t r = 0; r < replicas; ++r) {
      row.mise += ise[r];
      row.mean_h += hs[r];
    }
    row.mise /= static_cast<double>(replicas);
    row.mean_h /= static_cast<double>(replicas);
    double ss = 0.0;
    for (double v : ise) ss += (v - row.mise) * (v - row.mise);
    row.standard_error = std::sqrt(ss / static_cast<double>(replicas - 1)) /
                         std::sqrt(static_cast<double>(replicas));
    rows.push_back(row);
  }
  return rows;
}

} // namespace snrsub
