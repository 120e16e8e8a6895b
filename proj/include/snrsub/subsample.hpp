#pragma once

#include "snrsub/core.hpp"
#include "snrsub/smoother.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace snrsub {

/// Fills `out` with samples [start, start + out.size()) of some series. Lets
/// the estimator run against data that is never materialised in memory as a
/// whole (files, memory maps, generators).
using BlockReader = std::function<void(std::size_t start, std::span<double> out)>;

/// Smallest admissible secondary block length.
inline constexpr std::size_t kMinSecondaryBlock = 4;

/// Default secondary block length: max(4, floor(b^(2/5))).
[[nodiscard]] std::size_t default_secondary_block(std::size_t b);

struct SubsampleConfig {
  std::size_t b = 441;        // block length in samples
  std::size_t b1 = 0;         // secondary block length; 0 selects the default rule
  std::size_t k_blocks = 200; // number of blocks K
  std::uint64_t seed = 0;
  BandwidthGrid grid;
  unsigned threads = 1; // 0 = SNRSUB_THREADS or hardware concurrency
  /// Run CV once on the first drawn block and reuse its bandwidth for all
  /// blocks. An approximation that trades locality for speed.
  bool shared_bandwidth = false;
  double max_skip_fraction = 0.10;

  [[nodiscard]] std::size_t resolved_b1() const;
  /// Checks 4 <= b1 < b <= n and K <= n - b + 1.
  void validate(std::size_t n) const;
};

/// Per-block statistics. `start` is 0-based.
struct SubsampleEstimate {
  std::size_t start = 0;
  double u_hat = 0.0;
  double v_hat = 0.0;
  std::optional<SnrDb> snr; // empty when the block was skipped
  double h_hat = 0.0;

  [[nodiscard]] bool skipped() const noexcept { return !snr.has_value(); }
};

/// The subsample SNR values of one run.
class SnrDistribution {
public:
  SnrDistribution(std::vector<SubsampleEstimate> estimates, SubsampleConfig config);

  [[nodiscard]] std::span<const SubsampleEstimate> estimates() const noexcept { return estimates_; }
  /// Valid SNR values in draw order.
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const double> sorted_values() const noexcept { return sorted_; }
  [[nodiscard]] std::size_t skipped() const noexcept { return estimates_.size() - values_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] const SubsampleConfig& config() const noexcept { return config_; }

  [[nodiscard]] double quantile(QuantileLevel level) const { return sorted_quantile(sorted_, level); }
  [[nodiscard]] double median() const { return quantile(QuantileLevel(0.5)); }
  [[nodiscard]] double median_bandwidth() const;

private:
  std::vector<SubsampleEstimate> estimates_;
  std::vector<double> values_;
  std::vector<double> sorted_;
  SubsampleConfig config_;
};

/// K distinct 0-based start indices drawn uniformly without replacement from
/// {0, ..., n - b}. Deterministic for a given seed.
[[nodiscard]] std::vector<std::size_t> draw_blocks(std::size_t n, std::size_t b, std::size_t k,
                                                   std::uint64_t seed);

/// Statistics of one block given its samples:
/// U = mean of s_hat^2 over the block, V = (1/b1) sum (e - mean e)^2 over the
/// residuals of the first b1 points, SNR = 10 log10(U / V). Blocks with
/// V < 1e-12 max(U, 1) are returned with an empty snr.
/// When `fixed_h` is set the CV search is skipped.
[[nodiscard]] SubsampleEstimate block_statistics(std::span<const double> block, std::size_t b1,
                                                 const BandwidthGrid& grid,
                                                 std::optional<double> fixed_h = std::nullopt);

/// block_statistics on series[t, t + b). `t` is 0-based.
[[nodiscard]] SubsampleEstimate block_estimate(const TimeSeries& series, std::size_t t,
                                               const SubsampleConfig& cfg);

/// Draws the blocks, estimates each one (in parallel when cfg.threads > 1),
/// and collects the results in draw order. Only samples inside drawn blocks
/// are ever requested from `reader`. Throws snrsub::Error("excessive_skips")
/// when more than cfg.max_skip_fraction of the blocks were skipped.
[[nodiscard]] SnrDistribution estimate_snr_distribution(std::size_t n, const BlockReader& reader,
                                                        const SubsampleConfig& cfg);

[[nodiscard]] SnrDistribution estimate_snr_distribution(const TimeSeries& series,
                                                        const SubsampleConfig& cfg);

/// [q(alpha/2), q(1 - alpha/2)] of the raw subsample SNR values with
/// alpha = 1 - level.
[[nodiscard]] std::pair<SnrDb, SnrDb> confidence_interval(const SnrDistribution& dist,
                                                          double level);

struct BlockCandidate {
  std::size_t b = 0;
  std::size_t b1 = 0;
  double q_low = 0.0;  // 0.05 quantile
  double q_high = 0.0; // 0.95 quantile
  std::optional<double> volatility; // interior candidates only
  std::size_t skipped = 0;
  /// The skip budget was exceeded (e.g. a noiseless series); both quantiles
  /// are then +inf.
  bool degenerate = false;
};

struct BlockSelection {
  std::size_t chosen_b = 0;
  std::vector<BlockCandidate> candidates;
};

/// Minimal-volatility block length choice. For every candidate b the SNR
/// distribution is estimated (with that b's default b1); the volatility at
/// interior position j is the sum over the 0.05 and 0.95 quantiles of their
/// sample standard deviation over positions {j-1, j, j+1}. Returns the b with
/// the least volatility, ties to the smaller b. A window of three degenerate
/// candidates has zero volatility, a window mixing degenerate and regular
/// ones infinite volatility. Needs >= 5 increasing candidates.
[[nodiscard]] BlockSelection select_block_size(const TimeSeries& series,
                                               std::span<const std::size_t> candidates,
                                               const SubsampleConfig& cfg_template);

} // namespace snrsub
