#pragma once

#include "snrsub/core.hpp"
#include "snrsub/simgen.hpp"
#include "snrsub/subsample.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace snrsub {

/// One Monte Carlo experiment over a simulation design.
struct ExperimentSpec {
  Design design = Design::AR;
  SnrDb true_snr{10.0};
  double sample_rate_hz = 44100.0;
  double duration_s = 3.0;
  std::vector<std::size_t> block_sizes{441, 662};
  std::size_t k_blocks = 200;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  std::vector<double> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  double noise_variance = 1.0;
  /// Oracle Monte Carlo size: simulated series times blocks drawn per series.
  std::size_t oracle_series = 50;
  std::size_t oracle_blocks_per_series = 400;
  unsigned threads = 0;

  void validate() const;
  [[nodiscard]] DesignParams design_params() const;
};

/// Mean and standard error of one metric in one table cell.
struct McCell {
  std::string design;
  double true_snr_db = 0.0;
  std::size_t b = 0;
  std::string metric;
  std::optional<double> level;
  double mean = 0.0;
  double standard_error = 0.0; // sd / sqrt(count); 0 when count == 1
  std::size_t count = 0;
  bool valid = true;
  std::string note;
};

struct McReport {
  std::vector<McCell> cells;
  ExperimentSpec spec;
};

/// Everything one Monte Carlo replica produces for one block size.
struct ReplicaOutcome {
  std::vector<SubsampleEstimate> estimates;
  double mse = 0.0;         // vs the block's true signal power
  double mse_nominal = 0.0; // vs A^2 / 2
  std::vector<double> sorted_snr;
  std::size_t skipped = 0;
  bool valid = true; // false when the skip budget was exceeded
};

/// Simulates spec.replicas independent series and runs the subsample
/// estimator on each with block length b. Replica r uses data seed
/// derive_seed(spec.seed, r), so results do not depend on thread count.
[[nodiscard]] std::vector<ReplicaOutcome> run_replicas(const ExperimentSpec& spec, std::size_t b);

/// Mean and sd/sqrt(n) with the (n - 1) sample variance; se = 0 for n == 1.
[[nodiscard]] std::pair<double, double> mean_and_standard_error(std::span<const double> values);

/// Signal-power MSE. For every replica and block size, averages over the K
/// drawn blocks the squared error of U_hat against the block's true signal
/// power (mean of s^2 over the block). The metric "mse_nominal" measures the
/// same error against the design constant A^2/2 instead.
[[nodiscard]] McReport mse_signal_power(const ExperimentSpec& spec);

/// Per-replica signal power MSE values for one block size (metric "mse").
[[nodiscard]] std::vector<double> signal_power_mse_replicas(const ExperimentSpec& spec,
                                                            std::size_t b);

struct OracleQuantiles {
  std::vector<double> levels;
  std::vector<double> quantiles;
  std::size_t draws = 0;
};

/// Quantiles of the block SNR statistic computed from the known components:
/// 10 log10(mean(s^2) over b points / population variance of the true noise
/// over the first b1 points), over series_count independent simulated series
/// with blocks_per_series uniformly drawn blocks each.
[[nodiscard]] OracleQuantiles oracle_quantiles(const DesignParams& params, std::size_t b,
                                               std::size_t b1, std::span<const double> levels,
                                               std::size_t series_count,
                                               std::size_t blocks_per_series, std::uint64_t seed,
                                               unsigned threads = 0);

struct QuantileMaeResult {
  OracleQuantiles oracle;
  /// abs_dev[r][l] = |q_tilde(level_l) - q_oracle(level_l)| for replica r.
  std::vector<std::vector<double>> abs_dev;
  /// estimated[r][l] = q_tilde(level_l) for replica r.
  std::vector<std::vector<double>> estimated;
  std::vector<bool> replica_valid;
  McReport report;
};

/// Quantile mean absolute error against the oracle for one block size.
[[nodiscard]] QuantileMaeResult quantile_mae(const ExperimentSpec& spec, std::size_t b);

/// Same, reusing replicas already produced by run_replicas(spec, b).
[[nodiscard]] QuantileMaeResult quantile_mae(const ExperimentSpec& spec, std::size_t b,
                                             std::span<const ReplicaOutcome> outcomes);

/// Quantile MAE cells for every block size of the spec.
[[nodiscard]] McReport quantile_mae(const ExperimentSpec& spec);

struct ExhaustiveCheck {
  std::vector<double> randomized;  // sorted
  std::vector<double> exhaustive;  // sorted, all n - b + 1 blocks
  bool multiset_equal = false;
  bool within_envelope = false;    // randomized values within [min, max] of exhaustive
  double ks_distance = 0.0;
};

/// Compares the randomized subsample distribution with K blocks against the
/// exhaustive one over every admissible start. For tiny series (n <= 512).
[[nodiscard]] ExhaustiveCheck exhaustive_subsample_check(const TimeSeries& series, std::size_t b,
                                                         std::size_t b1, std::size_t k,
                                                         std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
[[nodiscard]] double ks_distance(std::span<const double> a, std::span<const double> b);

} // namespace snrsub
