#pragma once

#include "snrsub/core.hpp"
#include "snrsub/simgen.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace snrsub {

/// Candidate bandwidths, log-spaced on [c1 L^-1/5, c2 L^-1/5] where L is the
/// effective sample size lambda_n of the window being smoothed. Values above
/// 0.5 are clamped to 0.5 and duplicates dropped.
struct BandwidthGrid {
  double c1 = 0.05;
  double c2 = 1.0;
  std::size_t points = 25;

  void validate() const;
  [[nodiscard]] std::vector<double> values(std::size_t n, const DependenceRegime& regime) const;
};

/// Which autocorrelations enter the CV correction factor. `Dependent` uses the
/// sample autocorrelations of the residuals up to lag M; `Independent` keeps
/// only the lag-0 term, which is the classical correction for white noise.
enum class CvCorrection { Dependent, Independent };

struct CvPoint {
  double h = 0.0;
  double cv = 0.0; // +inf when the correction factor is degenerate
  std::size_t m_lags = 0;
};

struct KernelFit {
  std::vector<double> fitted;
  std::vector<double> residuals;
  double h_hat = 0.0;
  std::vector<CvPoint> cv_curve;
  std::size_t m_lags = 0;
};

/// Correction factors below this value mark a bandwidth as invalid.
inline constexpr double kCvCorrectionGuard = 0.05;

[[nodiscard]] double epanechnikov(double u) noexcept;

/// Weight-normalised Priestley-Chao fit evaluated at every design point
/// t_j = j/n, j = 1..n:
///   s_hat(t) = sum_i K((t - i/n)/h) y_i / sum_i K((t - i/n)/h).
/// Requires n >= 3 and 0 < h <= 0.5.
[[nodiscard]] std::vector<double> priestley_chao_fit(std::span<const double> y, double h);

/// Same estimator evaluated at an arbitrary t in [0, 1].
[[nodiscard]] double priestley_chao_at(std::span<const double> y, double h, double t);

/// gamma_hat(j) = (1/n) sum_{t=1}^{n-j} e_t e_{t+j}, no mean removal.
[[nodiscard]] double autocovariance(std::span<const double> residuals, std::size_t j);

/// Lag cutoff used by select_bandwidth: max(1, floor(sqrt(n h))) capped at n/4.
[[nodiscard]] std::size_t cv_lag_count(std::size_t n, double h);

/// Correlation-corrected cross-validation objective
///   [1 - (1/(nh)) sum_{|j|<=M} K(j/(nh)) rho_hat(j)]^-2 * (1/n) sum e_i^2
/// with residuals e of the fit at h. Returns +inf when the bracket falls below
/// kCvCorrectionGuard or when n h <= 1 (the fit interpolates the data). Requires 1 <= M <= n/4.
[[nodiscard]] double cv_objective(std::span<const double> y, double h, std::size_t m_lags,
                                  CvCorrection correction = CvCorrection::Dependent);

/// Minimises the CV objective over the grid (ties to the smaller h) and
/// returns the fit at the winner. Without a regime hint the grid uses the SRD
/// scaling lambda_n = n. Throws snrsub::Error("cv_degenerate") when every
/// candidate is invalid. Requires n >= 16.
[[nodiscard]] KernelFit select_bandwidth(std::span<const double> y,
                                         std::optional<DependenceRegime> regime_hint,
                                         const BandwidthGrid& grid,
                                         CvCorrection correction = CvCorrection::Dependent);

/// Fit at a fixed bandwidth (no search); cv_curve is left empty.
[[nodiscard]] KernelFit fit_with_bandwidth(std::span<const double> y, double h);

struct MiseRow {
  std::size_t n = 0;
  double mise = 0.0;
  double standard_error = 0.0;
  double mean_h = 0.0;
  std::size_t replicas = 0;
};

/// Empirical MISE of the CV-selected fit: for every n, averages
/// (1/n) sum_{h < i/n < 1-h} (s_hat(i/n) - s(i/n))^2 over replicas.
[[nodiscard]] std::vector<MiseRow> mise_probe(const std::function<double(double)>& s_true,
                                              const NoiseSpec& noise,
                                              std::span<const std::size_t> n_list,
                                              std::size_t replicas, std::uint64_t seed,
                                              unsigned threads = 1);

} // namespace snrsub
