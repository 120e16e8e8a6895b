// Acceptance suite: one PASS/FAIL line per criterion. Desk scale by default;
// SNRSUB_LONG=1 switches the Monte Carlo criteria to T = 30 s and 500
// replicas.

#include "app.hpp"

#include "snrsub/harness.hpp"
#include "snrsub/io.hpp"
#include "snrsub/parallel.hpp"
#include "snrsub/simgen.hpp"
#include "snrsub/smoother.hpp"
#include "snrsub/subsample.hpp"

#include "../oracles.hpp"
#include "../spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

using namespace snrsub;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool long_mode() {
  const char* v = std::getenv("SNRSUB_LONG");
  return v != nullptr && std::string(v) == "1";
}

std::vector<double> sine_unit(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n));
  }
  return s;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome kernel_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = epanechnikov(0.0) == 0.75 && epanechnikov(1.0) == 0.0 && epanechnikov(0.5) == 0.5625 &&
            epanechnikov(-1.0) == 0.0 && epanechnikov(2.0) == 0.0;
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t n : {16u, 64u, 128u, 256u}) {
    const auto y = gen_ar1(-0.7, 1.0, n, n);
    std::vector<double> c(n, 1.75);
    const auto z = gen_white(1.0, n, n + 1);
    for (double h : BandwidthGrid{}.values(n, DependenceRegime::srd())) {
      for (double v : priestley_chao_fit(c, h)) ok = ok && std::abs(v - 1.75) <= 1e-14;
      const auto fy = priestley_chao_fit(y, h);
      const auto fz = priestley_chao_fit(z, h);
      std::vector<double> mix(n);
      for (std::size_t i = 0; i < n; ++i) mix[i] = 3.0 * y[i] + z[i];
      const auto fm = priestley_chao_fit(mix, h);
      for (std::size_t i = 0; i < n; ++i) ok = ok && std::abs(fm[i] - 3.0 * fy[i] - fz[i]) <= 1e-12;
      const std::size_t m = cv_lag_count(n, h);
      const double a = cv_objective(y, h, m);
      const double b = oracle::cv(y, h, m);
      if (std::isinf(a) || std::isinf(b)) {
        ok = ok && std::isinf(a) && std::isinf(b);
      } else {
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
      ++checked;
    }
  }
  const double secs = elapsed(t0);
  ok = ok && worst <= 1e-12 && secs < 1.0;
  return {ok, fmt("%zu CV points, max rel diff %.2e, %.3f s (< 1 s)", checked, worst, secs)};
}

Outcome bandwidth_optimality() {
  const std::size_t n = 2048;
  const auto s = sine_unit(n);
  const BandwidthGrid grid;
  const auto hs = grid.values(n, DependenceRegime::srd());
  auto rmse = [&](const std::vector<double>& f) {
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += (f[i] - s[i]) * (f[i] - s[i]);
    return std::sqrt(a / static_cast<double>(n));
  };
  int ok = 0;
  double ratio_sum = 0.0;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    auto y = gen_white(0.01, n, derive_seed(2002, r));
    for (std::size_t i = 0; i < n; ++i) y[i] += s[i];
    const auto fit = select_bandwidth(y, std::nullopt, grid);
    double best = INFINITY;
    for (double h : hs) best = std::min(best, rmse(priestley_chao_fit(y, h)));
    const double ratio = rmse(fit.fitted) / best;
    ratio_sum += ratio;
    ok += ratio <= 2.0 ? 1 : 0;
  }
  return {ok >= 45, fmt("%d/%d replicas within 2x of grid-oracle RMSE (need 45), mean ratio %.3f",
                        ok, reps, ratio_sum / reps)};
}

Outcome mise_rate() {
  const std::vector<std::size_t> ns{1024, 4096};
  const auto rows = mise_probe([](double t) { return std::sin(2.0 * std::numbers::pi * t); },
                               WhiteNoise{0.01}, ns, 50, 3003, resolve_threads(0));
  const double per_doubling = std::sqrt(rows[0].mise / rows[1].mise);
  const double need = std::pow(2.0, 0.6);
  return {per_doubling >= need,
          fmt("MISE %.3e -> %.3e, per-doubling ratio %.3f (need >= %.3f, theory %.3f)", rows[0].mise,
              rows[1].mise, per_doubling, need, std::pow(2.0, 0.8))};
}

Outcome generator_fidelity() {
  const std::size_t n = 1u << 16;
  bool ok = true;
  std::string detail = "slopes";
  for (double beta : {0.0, 0.2, 0.6}) {
    const double slope = spectral::periodogram_slope(gen_powerlaw(beta, 1.0, n, 4004));
    ok = ok && std::abs(slope + beta) <= 0.1;
    detail += fmt(" b=%.1f:%.3f", beta, slope);
  }
  const double rho = oracle::lag_correlation(gen_ar1(-0.7, 1.0, 100000, 4005), 1);
  ok = ok && std::abs(rho + 0.7) <= 0.03;
  detail += fmt("; AR(1) lag-1 %.4f (target -0.7 +/- 0.03)", rho);
  return {ok, detail};
}

/// Replicas shared by criteria 5, 6 and 8.
struct ArTen {
  ExperimentSpec spec;
  std::vector<ReplicaOutcome> outcomes;
  double seconds = 0.0;
};

ArTen& ar_ten() {
  static ArTen cache = [] {
    ArTen c;
    c.spec.design = Design::AR;
    c.spec.true_snr = SnrDb{10.0};
    c.spec.k_blocks = 200;
    c.spec.seed = 5005;
    c.spec.threads = resolve_threads(0);
    if (long_mode()) {
      c.spec.duration_s = 30.0;
      c.spec.replicas = 500;
    } else {
      c.spec.duration_s = 3.0;
      c.spec.replicas = 100;
    }
    const auto t0 = std::chrono::steady_clock::now();
    c.outcomes = run_replicas(c.spec, 441);
    c.seconds = elapsed(t0);
    return c;
  }();
  return cache;
}

Outcome distribution_center() {
  auto& c = ar_ten();
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& r : c.outcomes) {
    if (!r.valid) continue;
    sum += std::abs(oracle::quantile_inf(r.sorted_snr, 0.5) - 10.0);
    ++used;
  }
  const double mean = sum / static_cast<double>(used);
  const bool ok = used == c.outcomes.size() && mean <= 1.5 && c.seconds < 300.0;
  return {ok, fmt("mean |median - 10 dB| = %.3f dB over %zu replicas (need <= 1.5), estimation %.1f s",
                  mean, used, c.seconds)};
}

Outcome tail_asymmetry() {
  auto& c = ar_ten();
  auto spec = c.spec;
  spec.levels = {0.1, 0.5, 0.9};
  const auto res = quantile_mae(spec, 441, c.outcomes);
  int both = 0;
  int left_over_mid = 0;
  int right_le_left = 0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < res.abs_dev.size(); ++r) {
    if (!res.replica_valid[r]) continue;
    ++used;
    const auto& d = res.abs_dev[r];
    const bool a = d[0] > d[1];
    const bool b = d[2] <= d[0];
    left_over_mid += a ? 1 : 0;
    right_le_left += b ? 1 : 0;
    both += a && b ? 1 : 0;
  }
  const int need = static_cast<int>(std::ceil(0.8 * static_cast<double>(used)));
  return {both >= need,
          fmt("both conditions in %d/%zu replicas (need %d); mae(0.1) > mae(0.5) in %d, "
              "mae(0.9) <= mae(0.1) in %d; oracle q = %.2f/%.2f/%.2f dB",
              both, used, need, left_over_mid, right_le_left, res.oracle.quantiles[0],
              res.oracle.quantiles[1], res.oracle.quantiles[2])};
}

Outcome mse_ordering() {
  auto spec_for = [](Design d) {
    ExperimentSpec s;
    s.design = d;
    s.true_snr = SnrDb{6.0};
    s.k_blocks = 200;
    s.seed = 7007;
    s.threads = resolve_threads(0);
    s.duration_s = long_mode() ? 30.0 : 3.0;
    s.replicas = long_mode() ? 500 : 100;
    return s;
  };
  auto mean_mse = [](const std::vector<ReplicaOutcome>& out) {
    std::vector<double> v;
    for (const auto& r : out) v.push_back(r.mse);
    return mean_and_standard_error(v);
  };
  double m[3][2];
  double se[3][2];
  const Design designs[3] = {Design::AR, Design::P1, Design::P2};
  const std::size_t bs[2] = {441, 662};
  for (int d = 0; d < 3; ++d) {
    for (int k = 0; k < 2; ++k) {
      std::tie(m[d][k], se[d][k]) = mean_mse(run_replicas(spec_for(designs[d]), bs[k]));
    }
  }
  const bool block_order = m[0][1] < m[0][0];
  const bool design_order = m[0][0] <= m[1][0] && m[1][0] <= m[2][0] && m[0][1] <= m[1][1] &&
                            m[1][1] <= m[2][1];
  return {block_order && design_order,
          fmt("AR b441 %.4f(%.4f) b662 %.4f(%.4f); P1 %.4f / %.4f; P2 %.4f / %.4f", m[0][0], se[0][0],
              m[0][1], se[0][1], m[1][0], m[1][1], m[2][0], m[2][1])};
}

Outcome ci_sanity() {
  auto& c = ar_ten();
  int covered = 0;
  int nested = 0;
  std::size_t used = 0;
  for (const auto& r : c.outcomes) {
    if (!r.valid) continue;
    ++used;
    const double lo90 = sorted_quantile(r.sorted_snr, QuantileLevel(0.05));
    const double hi90 = sorted_quantile(r.sorted_snr, QuantileLevel(0.95));
    const double lo95 = sorted_quantile(r.sorted_snr, QuantileLevel(0.025));
    const double hi95 = sorted_quantile(r.sorted_snr, QuantileLevel(0.975));
    covered += lo90 <= 10.0 && 10.0 <= hi90 ? 1 : 0;
    nested += lo95 <= lo90 && hi90 <= hi95 ? 1 : 0;
  }
  const int need = static_cast<int>(std::ceil(0.7 * static_cast<double>(used)));
  return {covered >= need && nested == static_cast<int>(used),
          fmt("90%% CI covers 10 dB in %d/%zu (need %d); 95%% contains 90%% in %d/%zu", covered, used,
              need, nested, used)};
}

Outcome exhaustive_equivalence() {
  auto noise = gen_ar1(-0.7, 1.0, 64, 9009);
  std::vector<double> y(64);
  for (std::size_t i = 0; i < 64; ++i) {
    y[i] = 4.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 32.0) + noise[i];
  }
  const TimeSeries ts(y, 44100.0);
  const auto check = exhaustive_subsample_check(ts, 16, default_secondary_block(16), 64 - 16 + 1, 9010);
  return {check.multiset_equal,
          fmt("%zu randomized vs %zu exhaustive values, multiset equal: %s, KS %.3f",
              check.randomized.size(), check.exhaustive.size(), check.multiset_equal ? "yes" : "no",
              check.ks_distance)};
}

Outcome determinism_and_scaling() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "snrsub_acceptance";
  fs::create_directories(dir);
  const auto path = (dir / "long.raw").string();
  DesignParams p;
  p.duration_s = 100.0;
  const auto sample = gen_design(p, 10010);
  write_raw_f64le(path, sample.series.samples());

  std::string first;
  bool identical = true;
  double secs4 = 0.0;
  for (const char* w : {"1", "4", "8"}) {
    std::ostringstream out;
    std::ostringstream err;
    const auto t0 = std::chrono::steady_clock::now();
    const int code = app::run({"estimate", "-i", path, "--fs", "44100", "--block-samples", "662",
                               "--k", "200", "--seed", "11", "--threads", w},
                              out, err);
    const double secs = elapsed(t0);
    if (code != 0) return {false, "estimate failed: " + err.str()};
    if (std::string(w) == "4") secs4 = secs;
    if (first.empty()) first = out.str();
    identical = identical && out.str() == first;
  }
  fs::remove(path);
  return {identical && secs4 < 60.0,
          fmt("JSON identical across 1/4/8 workers: %s; n=%zu b=662 K=200 end-to-end %.2f s with 4 "
              "workers on %u hardware threads (need < 60 s)",
              identical ? "yes" : "no", sample.series.size(), secs4,
              std::thread::hardware_concurrency())};
}

} // namespace

int main() {
  std::printf("snrsub acceptance (%s scale)\n", long_mode() ? "full" : "desk");
  report(1, "kernel correctness", kernel_correctness);
  report(2, "bandwidth optimality", bandwidth_optimality);
  report(3, "MISE rate", mise_rate);
  report(4, "generator fidelity", generator_fidelity);
  report(5, "distribution center", distribution_center);
  report(6, "tail asymmetry", tail_asymmetry);
  report(7, "MSE ordering", mse_ordering);
  report(8, "CI sanity", ci_sanity);
  report(9, "exhaustive equivalence", exhaustive_equivalence);
  report(10, "determinism and scaling", determinism_and_scaling);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
