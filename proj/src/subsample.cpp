#include "snrsub/subsample.hpp"

#include "snrsub/parallel.hpp"
#include "snrsub/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace snrsub {

namespace {

constexpr double kVarianceFloor = 1e-12;

} // namespace

std::size_t default_secondary_block(std::size_t b) {
  const auto rule = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(b), 0.4)));
  return std::max(kMinSecondaryBlock, rule);
}

std::size_t SubsampleConfig::resolved_b1() const {
  return b1 == 0 ? default_secondary_block(b) : b1;
}

void SubsampleConfig::validate(std::size_t n) const {
  const std::size_t sb = resolved_b1();
  if (b < 16) throw Error("bad_block", "block length must be at least 16 samples");
  if (b > n) {
    throw Error("bad_block", "block length " + std::to_string(b) + " exceeds series length " +
                                 std::to_string(n));
  }
  if (sb < kMinSecondaryBlock || sb >= b) {
    throw Error("bad_b1", "secondary block length must satisfy 4 <= b1 < b");
  }
  if (k_blocks < 1) throw Error("bad_k", "number of blocks must be positive");
  if (k_blocks > n - b + 1) {
    throw Error("k_too_large", "K=" + std::to_string(k_blocks) + " exceeds the " +
                                   std::to_string(n - b + 1) + " admissible block starts");
  }
  if (!(max_skip_fraction >= 0.0 && max_skip_fraction < 1.0)) {
    throw Error("bad_config", "skip fraction must lie in [0, 1)");
  }
  grid.validate();
}

SnrDistribution::SnrDistribution(std::vector<SubsampleEstimate> estimates, SubsampleConfig config)
    : estimates_(std::move(estimates)), config_(std::move(config)) {
  values_.reserve(estimates_.size());
  for (const auto& e : estimates_) {
    if (e.snr) values_.push_back(e.snr->value);
  }
  if (values_.empty()) throw Error("empty_distribution", "no valid subsample SNR values");
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

double SnrDistribution::median_bandwidth() const {
  std::vector<double> hs;
  hs.reserve(estimates_.size());
  for (const auto& e : estimates_) hs.push_back(e.h_hat);
  return empirical_quantile(hs, QuantileLevel(0.5));
}

std::vector<std::size_t> draw_blocks(std::size_t n, std::size_t b, std::size_t k,
                                     std::uint64_t seed) {
  if (b < 1 || b > n) throw Error("bad_block", "block length must satisfy 1 <= b <= n");
  const std::size_t population = n - b + 1;
  if (k > population) {
    throw Error("k_too_large", "cannot draw " + std::to_string(k) + " distinct blocks from " +
                                   std::to_string(population) + " starts");
  }
  // Floyd's sampling: k uniform draws without replacement in O(k) memory.
  Rng rng(seed);
  std::vector<std::size_t> starts;
  starts.reserve(k);
  std::unordered_set<std::size_t> taken;
  taken.reserve(2 * k);
  for (std::size_t j = population - k; j < population; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t chosen = taken.contains(t) ? j : t;
    taken.insert(chosen);
    starts.push_back(chosen);
  }
  return starts;
}

SubsampleEstimate block_statistics(std::span<const double> block, std::size_t b1,
                                   const BandwidthGrid& grid, std::optional<double> fixed_h) {
  if (b1 < kMinSecondaryBlock || b1 >= block.size()) {
    throw Error("bad_b1", "secondary block length must satisfy 4 <= b1 < b");
  }
  const KernelFit fit =
      fixed_h ? fit_with_bandwidth(block, *fixed_h) : select_bandwidth(block, std::nullopt, grid);

  SubsampleEstimate est;
  est.h_hat = fit.h_hat;
  est.u_hat = signal_power(fit.fitted);
  est.v_hat = population_variance(std::span<const double>(fit.residuals).first(b1));
  if (est.v_hat >= kVarianceFloor * std::max(est.u_hat, 1.0) && est.u_hat > 0.0) {
    est.snr = snr_db(est.u_hat, est.v_hat);
  }
  return est;
}

SubsampleEstimate block_estimate(const TimeSeries& series, std::size_t t,
                                 const SubsampleConfig& cfg) {
  if (t + cfg.b > series.size()) throw Error("bad_block", "block extends past the series end");
  auto est = block_statistics(series.samples().subspan(t, cfg.b), cfg.resolved_b1(), cfg.grid);
  est.start = t;
  return est;
}

SnrDistribution estimate_snr_distribution(std::size_t n, const BlockReader& reader,
                                          const SubsampleConfig& cfg) {
  cfg.validate(n);
  const std::size_t b1 = cfg.resolved_b1();
  // Starts are fixed before any parallel work.
  const auto starts = draw_blocks(n, cfg.b, cfg.k_blocks, cfg.seed);

  std::optional<double> shared_h;
  if (cfg.shared_bandwidth) {
    std::vector<double> block(cfg.b);
    reader(starts.front(), block);
    shared_h = select_bandwidth(block, std::nullopt, cfg.grid).h_hat;
  }

  std::vector<SubsampleEstimate> estimates(starts.size());
  parallel_for(starts.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    std::vector<double> block(cfg.b);
    reader(starts[i], block);
    estimates[i] = block_statistics(block, b1, cfg.grid, shared_h);
    estimates[i].start = starts[i];
  });

  std::size_t skipped = 0;
  for (const auto& e : estimates) skipped += e.skipped() ? 1 : 0;
  if (static_cast<double>(skipped) > cfg.max_skip_fraction * static_cast<double>(starts.size())) {
    throw Error("excessive_skips", std::to_string(skipped) + " of " +
                                       std::to_string(starts.size()) +
                                       " blocks had a degenerate noise variance estimate");
  }
  return SnrDistribution(std::move(estimates), cfg);
}

SnrDistribution estimate_snr_distribution(const TimeSeries& series, const SubsampleConfig& cfg) {
  const auto samples = series.samples();
  return estimate_snr_distribution(
      series.size(),
      [samples](std::size_t start, std::span<double> out) {
        std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), out.size(), out.begin());
      },
      cfg);
}

std::pair<SnrDb, SnrDb> confidence_interval(const SnrDistribution& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error("bad_level", "confidence level must lie in (0, 1)");
  }
  const double alpha = 1.0 - level;
  return {SnrDb{dist.quantile(QuantileLevel(alpha / 2.0))},
          SnrDb{dist.quantile(QuantileLevel(1.0 - alpha / 2.0))}};
}

BlockSelection select_block_size(const TimeSeries& series,
                                 std::span<const std::size_t> candidates,
                                 const SubsampleConfig& cfg_template) {
  if (candidates.size() < 5) {
    throw Error("grid_too_short", "block-size selection needs at least 5 candidates");
  }
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    if (candidates[j] <= candidates[j - 1]) {
      throw Error("bad_grid", "block-size candidates must be strictly increasing");
    }
  }

  BlockSelection selection;
  selection.candidates.reserve(candidates.size());
  for (std::size_t b : candidates) {
    SubsampleConfig cfg = cfg_template;
    cfg.b = b;
    cfg.b1 = 0;
    BlockCandidate candidate;
    candidate.b = b;
    candidate.b1 = cfg.resolved_b1();
    try {
      const SnrDistribution dist = estimate_snr_distribution(series, cfg);
      candidate.q_low = dist.quantile(QuantileLevel(0.05));
      candidate.q_high = dist.quantile(QuantileLevel(0.95));
      candidate.skipped = dist.skipped();
    } catch (const Error& e) {
      if (e.code() != "excessive_skips" && e.code() != "empty_distribution") throw;
      candidate.degenerate = true;
      candidate.q_low = std::numeric_limits<double>::infinity();
      candidate.q_high = std::numeric_limits<double>::infinity();
      candidate.skipped = cfg.k_blocks;
    }
    selection.candidates.push_back(candidate);
  }

  auto window_sd = [&](std::size_t j, auto member) {
    const double a = selection.candidates[j - 1].*member;
    const double b = selection.candidates[j].*member;
    const double c = selection.candidates[j + 1].*member;
    if (std::isinf(a) || std::isinf(b) || std::isinf(c)) {
      return a == b && b == c ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const double mean = (a + b + c) / 3.0;
    return std::sqrt(((a - mean) * (a - mean) + (b - mean) * (b - mean) + (c - mean) * (c - mean)) /
                     2.0);
  };

  double best = std::numeric_limits<double>::infinity();
  selection.chosen_b = candidates[1];
  for (std::size_t j = 1; j + 1 < candidates.size(); ++j) {
    const double vol = window_sd(j, &BlockCandidate::q_low) + window_sd(j, &BlockCandidate::q_high);
    selection.candidates[j].volatility = vol;
    if (vol < best) {
      best = vol;
      selection.chosen_b = candidates[j];
    }
  }
  return selection;
}

} // namespace snrsub
