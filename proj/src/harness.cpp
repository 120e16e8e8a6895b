#include "snrsub/harness.hpp"

#include "snrsub/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snrsub {

namespace {

// Stream offsets keep data, block-draw and oracle randomness disjoint.
constexpr std::uint64_t kDrawStream = 0x1000000000ULL;
constexpr std::uint64_t kOracleStream = 0x2000000000ULL;

double mean_square_error(std::span<const double> estimates, std::span<const double> refs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double e = estimates[i] - refs[i];
    acc += e * e;
  }
  return acc / static_cast<double>(estimates.size());
}

McCell make_cell(const ExperimentSpec& spec, std::size_t b, std::string metric,
                 std::span<const double> values) {
  McCell cell;
  cell.design = std::string(to_string(spec.design));
  cell.true_snr_db = spec.true_snr.value;
  cell.b = b;
  cell.metric = std::move(metric);
  cell.count = values.size();
  if (values.empty()) {
    cell.valid = false;
    cell.note = "no valid replicas";
    return cell;
  }
  std::tie(cell.mean, cell.standard_error) = mean_and_standard_error(values);
  return cell;
}

} // namespace

void ExperimentSpec::validate() const {
  if (replicas < 1) throw Error("bad_spec", "replicas must be at least 1");
  if (block_sizes.empty()) throw Error("bad_spec", "at least one block size is required");
  if (levels.empty()) throw Error("bad_spec", "at least one quantile level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw Error("bad_spec", "quantile levels must lie in (0, 1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw Error("bad_spec", "quantile levels must be sorted ascending");
    }
  }
  if (oracle_series < 1 || oracle_blocks_per_series < 1) {
    throw Error("bad_spec", "oracle sizes must be positive");
  }
}

DesignParams ExperimentSpec::design_params() const {
  DesignParams p;
  p.design = design;
  p.target_snr = true_snr;
  p.sample_rate_hz = sample_rate_hz;
  p.duration_s = duration_s;
  p.noise_variance = noise_variance;
  return p;
}

std::pair<double, double> mean_and_standard_error(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0)) / std::sqrt(count)};
}

std::vector<ReplicaOutcome> run_replicas(const ExperimentSpec& spec, std::size_t b) {
  spec.validate();
  const DesignParams params = spec.design_params();
  SubsampleConfig cfg;
  cfg.b = b;
  cfg.k_blocks = spec.k_blocks;
  cfg.threads = 1;

  std::vector<ReplicaOutcome> outcomes(spec.replicas);
  parallel_for(spec.replicas, resolve_threads(spec.threads), [&](std::size_t r) {
    const DesignSample sample = gen_design(params, derive_seed(spec.seed, r));
    SubsampleConfig local = cfg;
    local.seed = derive_seed(spec.seed, kDrawStream + r);
    local.validate(sample.series.size());

    const auto starts = draw_blocks(sample.series.size(), b, local.k_blocks, local.seed);
    const auto signal = std::span<const double>(sample.signal);
    ReplicaOutcome& out = outcomes[r];
    out.estimates.reserve(starts.size());
    std::vector<double> u_hat;
    std::vector<double> block_power;
    for (std::size_t start : starts) {
      auto est = block_statistics(sample.series.samples().subspan(start, b), local.resolved_b1(),
                                  local.grid);
      est.start = start;
      u_hat.push_back(est.u_hat);
      block_power.push_back(signal_power(signal.subspan(start, b)));
      if (est.snr) out.sorted_snr.push_back(est.snr->value);
      out.estimates.push_back(est);
    }
    out.mse = mean_square_error(u_hat, block_power);
    const std::vector<double> nominal(u_hat.size(), sample.true_signal_power());
    out.mse_nominal = mean_square_error(u_hat, nominal);
    out.skipped = starts.size() - out.sorted_snr.size();
    out.valid = !out.sorted_snr.empty() &&
                static_cast<double>(out.skipped) <=
                    local.max_skip_fraction * static_cast<double>(starts.size());
    std::sort(out.sorted_snr.begin(), out.sorted_snr.end());
  });
  return outcomes;
}

std::vector<double> signal_power_mse_replicas(const ExperimentSpec& spec, std::size_t b) {
  const auto outcomes = run_replicas(spec, b);
  std::vector<double> mse;
  mse.reserve(outcomes.size());
  for (const auto& o : outcomes) mse.push_back(o.mse);
  return mse;
}

McReport mse_signal_power(const ExperimentSpec& spec) {
  McReport report;
  report.spec = spec;
  for (std::size_t b : spec.block_sizes) {
    const auto outcomes = run_replicas(spec, b);
    std::vector<double> mse;
    std::vector<double> nominal;
    for (const auto& o : outcomes) {
      mse.push_back(o.mse);
      nominal.push_back(o.mse_nominal);
    }
    report.cells.push_back(make_cell(spec, b, "mse", mse));
    report.cells.push_back(make_cell(spec, b, "mse_nominal", nominal));
  }
  return report;
}

OracleQuantiles oracle_quantiles(const DesignParams& params, std::size_t b, std::size_t b1,
                                 std::span<const double> levels, std::size_t series_count,
                                 std::size_t blocks_per_series, std::uint64_t seed,
                                 unsigned threads) {
  if (b1 < 2 || b1 > b) throw std::invalid_argument("oracle requires 2 <= b1 <= b");
  std::vector<std::vector<double>> per_series(series_count);
  parallel_for(series_count, resolve_threads(threads), [&](std::size_t s) {
    const DesignSample sample = gen_design(params, derive_seed(seed, s));
    if (b > sample.series.size()) throw Error("bad_block", "oracle block exceeds series length");
    const std::size_t population = sample.series.size() - b + 1;
    Rng rng(derive_seed(seed, kDrawStream + s));
    std::uniform_int_distribution<std::size_t> pick(0, population - 1);
    const auto signal = std::span<const double>(sample.signal);
    const auto noise = std::span<const double>(sample.noise);
    auto& out = per_series[s];
    out.reserve(blocks_per_series);
    for (std::size_t k = 0; k < blocks_per_series; ++k) {
      const std::size_t start = pick(rng);
      const double power = signal_power(signal.subspan(start, b));
      const double var = population_variance(noise.subspan(start, b1));
      if (power > 0.0 && var > 0.0) out.push_back(snr_db(power, var).value);
    }
  });

  std::vector<double> all;
  for (const auto& v : per_series) all.insert(all.end(), v.begin(), v.end());
  OracleQuantiles result;
  result.levels.assign(levels.begin(), levels.end());
  result.draws = all.size();
  if (all.empty()) {
    // Degenerate design (no noise or no signal): every level is unbounded.
    result.quantiles.assign(levels.size(), std::numeric_limits<double>::infinity());
    return result;
  }
  std::sort(all.begin(), all.end());
  for (double level : levels) result.quantiles.push_back(sorted_quantile(all, QuantileLevel(level)));
  return result;
}

QuantileMaeResult quantile_mae(const ExperimentSpec& spec, std::size_t b,
                               std::span<const ReplicaOutcome> outcomes) {
  spec.validate();
  QuantileMaeResult result;
  result.oracle = oracle_quantiles(spec.design_params(), b, default_secondary_block(b),
                                   spec.levels, spec.oracle_series, spec.oracle_blocks_per_series,
                                   derive_seed(spec.seed, kOracleStream), spec.threads);
  result.report.spec = spec;

  const std::size_t levels = spec.levels.size();
  std::vector<std::vector<double>> by_level(levels);
  for (const auto& o : outcomes) {
    result.replica_valid.push_back(o.valid);
    std::vector<double> dev(levels, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> est(levels, std::numeric_limits<double>::quiet_NaN());
    if (o.valid) {
      for (std::size_t l = 0; l < levels; ++l) {
        est[l] = sorted_quantile(o.sorted_snr, QuantileLevel(spec.levels[l]));
        dev[l] = std::abs(est[l] - result.oracle.quantiles[l]);
        if (std::isfinite(dev[l])) by_level[l].push_back(dev[l]);
      }
    }
    result.abs_dev.push_back(std::move(dev));
    result.estimated.push_back(std::move(est));
  }

  for (std::size_t l = 0; l < levels; ++l) {
    McCell cell = make_cell(spec, b, "quantile_mae", by_level[l]);
    cell.level = spec.levels[l];
    if (!cell.valid) cell.note = "degenerate design: no replica produced a usable distribution";
    result.report.cells.push_back(std::move(cell));
  }
  return result;
}

QuantileMaeResult quantile_mae(const ExperimentSpec& spec, std::size_t b) {
  const auto outcomes = run_replicas(spec, b);
  return quantile_mae(spec, b, outcomes);
}

McReport quantile_mae(const ExperimentSpec& spec) {
  McReport report;
  report.spec = spec;
  for (std::size_t b : spec.block_sizes) {
    auto part = quantile_mae(spec, b);
    for (auto& c : part.report.cells) report.cells.push_back(std::move(c));
  }
  return report;
}

ExhaustiveCheck exhaustive_subsample_check(const TimeSeries& series, std::size_t b,
                                           std::size_t b1, std::size_t k, std::uint64_t seed) {
  const std::size_t n = series.size();
  if (n > 512) throw std::invalid_argument("exhaustive check is limited to n <= 512");
  SubsampleConfig cfg;
  cfg.b = b;
  cfg.b1 = b1;
  cfg.k_blocks = k;
  cfg.seed = seed;
  cfg.max_skip_fraction = 0.99;
  cfg.validate(n);

  ExhaustiveCheck check;
  const SnrDistribution dist = estimate_snr_distribution(series, cfg);
  check.randomized.assign(dist.sorted_values().begin(), dist.sorted_values().end());

  for (std::size_t t = 0; t + b <= n; ++t) {
    const auto est = block_estimate(series, t, cfg);
    if (est.snr) check.exhaustive.push_back(est.snr->value);
  }
  std::sort(check.exhaustive.begin(), check.exhaustive.end());

  check.multiset_equal = check.randomized == check.exhaustive;
  check.within_envelope =
      !check.exhaustive.empty() &&
      std::all_of(check.randomized.begin(), check.randomized.end(), [&](double v) {
        return v >= check.exhaustive.front() && v <= check.exhaustive.back();
      });
  check.ks_distance = ks_distance(check.randomized, check.exhaustive);
  return check;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS distance of an empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

} // namespace snrsub
