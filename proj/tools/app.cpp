#include "app.hpp"

#include "snrsub/harness.hpp"
#include "snrsub/io.hpp"
#include "snrsub/parallel.hpp"
#include "snrsub/simgen.hpp"
#include "snrsub/smoother.hpp"
#include "snrsub/subsample.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace snrsub::app {

using nlohmann::json;

namespace {

struct InputOptions {
  std::string path;
  std::string format;
  std::optional<double> fs;
  std::size_t channel = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--input,-i", path, "Input file")->required();
    cmd.add_option("--format", format, "wav16 | csv | raw_f64le (default: from extension)");
    cmd.add_option("--fs", fs, "Sample rate in Hz (required for csv and raw input)");
    cmd.add_option("--channel", channel, "WAV channel index");
  }

  [[nodiscard]] InputDescriptor descriptor() const {
    InputDescriptor desc;
    desc.path = path;
    if (!format.empty()) {
      desc.format = parse_input_format(format);
    } else {
      const auto ext = desc.path.extension().string();
      desc.format = ext == ".wav" ? InputFormat::Wav16
                    : ext == ".csv" ? InputFormat::Csv
                                    : InputFormat::RawF64Le;
    }
    desc.sample_rate_hz = fs;
    desc.channel = channel;
    return desc;
  }
};

struct BlockOptions {
  std::optional<double> ms;
  std::optional<std::size_t> samples;
  std::optional<double> seconds;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--block-ms", ms, "Block length in milliseconds");
    cmd.add_option("--block-samples", samples, "Block length in samples");
    cmd.add_option("--block-s", seconds, "Block length in seconds");
  }

  [[nodiscard]] std::size_t resolve(double fs) const {
    const int given = (ms ? 1 : 0) + (samples ? 1 : 0) + (seconds ? 1 : 0);
    if (given > 1) {
      throw Error("config_conflict",
                  "give only one of --block-ms, --block-samples and --block-s");
    }
    if (samples) return *samples;
    if (ms) return ms_to_samples(*ms, fs);
    if (seconds) return ms_to_samples(*seconds * 1000.0, fs);
    throw Error("missing_block", "one of --block-ms, --block-samples or --block-s is required");
  }
};

/// Loaded or lazily readable input series.
struct Source {
  std::size_t n = 0;
  double fs = 0.0;
  std::optional<TimeSeries> series;
  std::optional<RawFileReader> raw;

  [[nodiscard]] BlockReader reader() const {
    if (raw) return raw->block_reader();
    const auto samples = series->samples();
    return [samples](std::size_t start, std::span<double> out) {
      std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), out.size(), out.begin());
    };
  }

  [[nodiscard]] const TimeSeries& materialise() {
    if (!series) {
      std::vector<double> all(n);
      raw->read(0, all);
      series.emplace(std::move(all), fs);
    }
    return *series;
  }
};

Source open_source(const InputOptions& opts, bool lazy) {
  const InputDescriptor desc = opts.descriptor();
  Source src;
  if (lazy && desc.format == InputFormat::RawF64Le) {
    if (!desc.sample_rate_hz) {
      throw Error("missing_sample_rate", "--fs is required for raw_f64le input");
    }
    if (!(*desc.sample_rate_hz > 0.0)) throw Error("bad_sample_rate", "sample rate must be positive");
    src.raw.emplace(desc.path);
    if (src.raw->size() == 0) throw Error("empty_series", "raw file contains no samples");
    src.n = src.raw->size();
    src.fs = *desc.sample_rate_hz;
    return src;
  }
  src.series.emplace(read_input(desc));
  src.n = src.series->size();
  src.fs = src.series->sample_rate_hz();
  return src;
}

json input_json(const InputOptions& opts, const Source& src) {
  return {{"path", opts.path},
          {"format", std::string(to_string(opts.descriptor().format))},
          {"n", src.n},
          {"fs", src.fs},
          {"channel", opts.channel}};
}

json grid_json(const BandwidthGrid& grid) {
  return {{"c1", grid.c1}, {"c2", grid.c2}, {"points", grid.points}};
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

void emit(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("io_write", "cannot write '" + path + "'");
  f << doc.dump(2) << "\n";
}

std::ofstream open_text(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("io_write", "cannot write '" + path + "'");
  f << std::setprecision(17);
  return f;
}

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string design = "ar";
  double snr = 10.0;
  double fs = 44100.0;
  double duration = 3.0;
  std::uint64_t seed = 0;
  double noise_variance = 1.0;
  double amplitude = 1.0;
  std::string format = "raw_f64le";
  std::string out;
  std::string manifest;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  DesignParams params;
  params.design = parse_design(o.design);
  params.target_snr = SnrDb{o.snr};
  params.sample_rate_hz = o.fs;
  params.duration_s = o.duration;
  params.noise_variance = o.noise_variance;
  params.sine_only_amplitude = o.amplitude;
  const InputFormat format = parse_input_format(o.format);
  if (format == InputFormat::Csv) throw Error("bad_format", "simulate writes raw_f64le or wav16");

  const DesignSample sample = gen_design(params, o.seed);
  const auto samples = sample.series.samples();

  json manifest = {{"schema_version", kSchemaVersion},
                   {"command", "simulate"},
                   {"design", std::string(to_string(params.design))},
                   {"n", sample.series.size()},
                   {"fs", o.fs},
                   {"duration_s", o.duration},
                   {"seed", o.seed},
                   {"signal", {{"kind", "sine"},
                               {"frequency_hz", params.frequency_hz},
                               {"amplitude", sample.amplitude},
                               {"true_power", sample.true_signal_power()}}},
                   {"data", {{"path", o.out}, {"format", std::string(to_string(format))}}}};

  json noise = nullptr;
  if (params.design != Design::SineOnly) {
    noise = std::visit(
        [](const auto& s) -> json {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Ar1Noise>) {
            return {{"kind", "ar1"}, {"phi", s.phi}, {"variance", s.variance}};
          } else if constexpr (std::is_same_v<T, PowerLawNoise>) {
            return {{"kind", "powerlaw"}, {"beta", s.beta}, {"variance", s.variance}};
          } else {
            return {{"kind", "white"}, {"variance", s.variance}};
          }
        },
        sample.noise_spec);
  }
  manifest["noise"] = noise;
  const bool has_snr = params.design != Design::SineOnly && params.design != Design::NoiseOnly;
  manifest["true_snr_db"] = has_snr ? json(o.snr) : json(nullptr);

  if (format == InputFormat::Wav16) {
    double peak = 0.0;
    for (double v : samples) peak = std::max(peak, std::abs(v));
    const double gain = peak > 0.0 ? 0.99 / peak : 1.0;
    const double rounded_fs = std::round(o.fs);
    if (rounded_fs != o.fs) throw Error("bad_sample_rate", "wav16 output needs an integer rate");
    write_wav16(o.out, samples, static_cast<std::uint32_t>(rounded_fs), gain);
    manifest["data"]["wav_gain"] = gain;
  } else {
    write_raw_f64le(o.out, samples);
  }

  emit(manifest, o.manifest.empty() ? o.out + ".json" : o.manifest, out);
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  InputOptions input;
  BlockOptions block;
  std::size_t b1 = 0;
  std::size_t k = 200;
  std::uint64_t seed = 0;
  std::vector<double> levels{0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};
  std::vector<double> ci{0.90, 0.95};
  unsigned threads = 0;
  bool shared_bandwidth = false;
  bool timings = false;
  std::string out;
  std::string values_csv;
};

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Source src = open_source(o.input, true);
  const double load_s = elapsed_s(t0);

  SubsampleConfig cfg;
  cfg.b = o.block.resolve(src.fs);
  cfg.b1 = o.b1;
  cfg.k_blocks = o.k;
  cfg.seed = o.seed;
  cfg.threads = resolve_threads(o.threads);
  cfg.shared_bandwidth = o.shared_bandwidth;
  for (double l : o.levels) (void)QuantileLevel(l);
  for (double l : o.ci) {
    if (!(l > 0.0 && l < 1.0)) throw Error("bad_level", "confidence levels must lie in (0, 1)");
  }

  const auto t1 = std::chrono::steady_clock::now();
  const SnrDistribution dist = estimate_snr_distribution(src.n, src.reader(), cfg);
  const double estimate_s = elapsed_s(t1);

  json quantiles = json::array();
  for (double l : o.levels) {
    quantiles.push_back({{"level", l}, {"snr_db", dist.quantile(QuantileLevel(l))}});
  }
  json intervals = json::array();
  for (double l : o.ci) {
    const auto [lo, hi] = confidence_interval(dist, l);
    intervals.push_back({{"level", l}, {"lower_db", lo.value}, {"upper_db", hi.value}});
  }

  json report = {
      {"schema_version", kSchemaVersion},
      {"command", "estimate"},
      {"config",
       {{"input", input_json(o.input, src)},
        {"b", cfg.b},
        {"b_ms", 1000.0 * static_cast<double>(cfg.b) / src.fs},
        {"b1", cfg.resolved_b1()},
        {"k", cfg.k_blocks},
        {"seed", cfg.seed},
        {"levels", o.levels},
        {"ci", o.ci},
        {"shared_bandwidth", cfg.shared_bandwidth},
        {"max_skip_fraction", cfg.max_skip_fraction},
        {"grid", grid_json(cfg.grid)}}},
      {"result",
       {{"valid_blocks", dist.size()},
        {"skipped", dist.skipped()},
        {"median_snr_db", dist.median()},
        {"median_bandwidth", dist.median_bandwidth()},
        {"quantiles", quantiles},
        {"confidence_intervals", intervals}}}};
  if (o.timings) {
    report["timings_s"] = {{"load", load_s}, {"estimate", estimate_s}, {"threads", cfg.threads}};
  }

  if (!o.values_csv.empty()) {
    auto f = open_text(o.values_csv);
    f << "start,u_hat,v_hat,snr_db,h_hat,skipped\n";
    for (const auto& e : dist.estimates()) {
      f << e.start << ',' << e.u_hat << ',' << e.v_hat << ',';
      if (e.snr) f << e.snr->value;
      f << ',' << e.h_hat << ',' << (e.skipped() ? 1 : 0) << '\n';
    }
  }
  emit(report, o.out, out);
  return 0;
}

// ------------------------------------------------------------ select-block

struct SelectOptions {
  InputOptions input;
  double grid_min = 2.0;
  double grid_max = 20.0;
  std::size_t grid_steps = 10;
  std::string grid_unit = "ms";
  std::size_t k = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string table_csv;
};

std::vector<std::size_t> block_grid(double lo, double hi, std::size_t steps,
                                    const std::string& unit, double fs) {
  if (!(lo > 0.0) || !(hi > lo) || steps < 5) {
    throw Error("bad_grid", "grid needs 0 < min < max and at least 5 steps");
  }
  double to_ms = 1.0;
  if (unit == "s") {
    to_ms = 1000.0;
  } else if (unit != "ms") {
    throw Error("bad_grid", "grid unit must be ms or s");
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < steps; ++j) {
    const double v = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(steps - 1);
    const std::size_t b = ms_to_samples(v * to_ms, fs);
    if (out.empty() || b > out.back()) out.push_back(b);
  }
  return out;
}

int cmd_select_block(const SelectOptions& o, std::ostream& out) {
  Source src = open_source(o.input, false);
  const TimeSeries& series = src.materialise();
  const auto grid = block_grid(o.grid_min, o.grid_max, o.grid_steps, o.grid_unit, src.fs);
  for (std::size_t b : grid) {
    if (b < 16 || b > src.n || o.k > src.n - b + 1) {
      throw Error("grid_infeasible", "candidate block length " + std::to_string(b) +
                                         " is not feasible for n=" + std::to_string(src.n) +
                                         " and K=" + std::to_string(o.k));
    }
  }

  SubsampleConfig cfg;
  cfg.k_blocks = o.k;
  cfg.seed = o.seed;
  cfg.threads = resolve_threads(o.threads);
  const BlockSelection sel = select_block_size(series, grid, cfg);

  json table = json::array();
  for (const auto& c : sel.candidates) {
    table.push_back({{"b", c.b},
                     {"b_ms", 1000.0 * static_cast<double>(c.b) / src.fs},
                     {"b1", c.b1},
                     {"q05_db", number_or_null(c.q_low)},
                     {"q95_db", number_or_null(c.q_high)},
                     {"volatility", c.volatility ? number_or_null(*c.volatility) : json(nullptr)},
                     {"skipped", c.skipped},
                     {"degenerate", c.degenerate}});
  }
  json report = {{"schema_version", kSchemaVersion},
                 {"command", "select-block"},
                 {"config",
                  {{"input", input_json(o.input, src)},
                   {"grid_min", o.grid_min},
                   {"grid_max", o.grid_max},
                   {"grid_steps", o.grid_steps},
                   {"grid_unit", o.grid_unit},
                   {"candidates", grid},
                   {"k", o.k},
                   {"seed", o.seed},
                   {"bandwidth_grid", grid_json(cfg.grid)}}},
                 {"result",
                  {{"chosen_b", sel.chosen_b},
                   {"chosen_b_ms", 1000.0 * static_cast<double>(sel.chosen_b) / src.fs},
                   {"table", table}}}};

  if (!o.table_csv.empty()) {
    auto f = open_text(o.table_csv);
    f << "b,b_ms,b1,q05_db,q95_db,volatility,skipped,degenerate\n";
    for (const auto& c : sel.candidates) {
      f << c.b << ',' << 1000.0 * static_cast<double>(c.b) / src.fs << ',' << c.b1 << ','
        << c.q_low << ',' << c.q_high << ',';
      if (c.volatility) f << *c.volatility;
      f << ',' << c.skipped << ',' << (c.degenerate ? 1 : 0) << '\n';
    }
  }
  emit(report, o.out, out);
  return 0;
}

// --------------------------------------------------------------- bandwidth

struct BandwidthOptions {
  InputOptions input;
  BlockOptions block;
  std::size_t start = 0;
  std::string out;
  std::string summary;
};

int cmd_bandwidth(const BandwidthOptions& o, std::ostream& out) {
  Source src = open_source(o.input, true);
  const std::size_t b = o.block.resolve(src.fs);
  if (b < 16 || o.start + b > src.n) {
    throw Error("bad_block", "block [start, start + b) must lie inside the series with b >= 16");
  }
  std::vector<double> block(b);
  src.reader()(o.start, block);
  const BandwidthGrid grid;
  const KernelFit fit = select_bandwidth(block, std::nullopt, grid);

  std::ostringstream csv;
  csv << std::setprecision(17) << "h,cv,m_lags\n";
  for (const auto& p : fit.cv_curve) {
    csv << p.h << ',';
    if (std::isfinite(p.cv)) {
      csv << p.cv;
    } else {
      csv << "inf";
    }
    csv << ',' << p.m_lags << '\n';
  }
  if (o.out.empty() || o.out == "-") {
    out << csv.str();
  } else {
    auto f = open_text(o.out);
    f << csv.str();
  }

  if (!o.summary.empty()) {
    json summary = {{"schema_version", kSchemaVersion},
                    {"command", "bandwidth"},
                    {"config",
                     {{"input", input_json(o.input, src)},
                      {"start", o.start},
                      {"b", b},
                      {"grid", grid_json(grid)}}},
                    {"result", {{"h_hat", fit.h_hat}, {"m_lags", fit.m_lags}}}};
    emit(summary, o.summary, out);
  }
  return 0;
}

// ---------------------------------------------------------------------- mc

struct McOptions {
  std::string design = "ar";
  double snr = 10.0;
  double fs = 44100.0;
  double duration = 3.0;
  std::vector<double> block_ms{10.0, 15.0};
  std::size_t k = 200;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  std::vector<double> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  std::string metric = "all";
  bool quick = false;
  unsigned threads = 0;
  std::string out;
  std::string csv;
};

json cell_json(const McCell& c, double fs) {
  return {{"design", c.design},
          {"true_snr_db", c.true_snr_db},
          {"b", c.b},
          {"b_ms", 1000.0 * static_cast<double>(c.b) / fs},
          {"metric", c.metric},
          {"level", c.level ? json(*c.level) : json(nullptr)},
          {"mean", c.valid ? json(c.mean) : json(nullptr)},
          {"se", c.valid && c.count > 1 ? json(c.standard_error) : json(nullptr)},
          {"count", c.count},
          {"valid", c.valid},
          {"note", c.note}};
}

int cmd_mc(const McOptions& o, std::ostream& out) {
  ExperimentSpec spec;
  spec.design = parse_design(o.design);
  spec.true_snr = SnrDb{o.snr};
  spec.sample_rate_hz = o.fs;
  spec.duration_s = o.duration;
  spec.k_blocks = o.k;
  spec.replicas = o.quick ? std::min<std::size_t>(o.replicas, 10) : o.replicas;
  spec.seed = o.seed;
  spec.levels = o.levels;
  spec.threads = resolve_threads(o.threads);
  if (o.quick) {
    spec.oracle_series = 10;
    spec.oracle_blocks_per_series = 200;
  }
  spec.block_sizes.clear();
  for (double ms : o.block_ms) spec.block_sizes.push_back(ms_to_samples(ms, o.fs));
  if (o.metric != "all" && o.metric != "mse" && o.metric != "qmae") {
    throw Error("bad_metric", "metric must be mse, qmae or all");
  }

  std::vector<McCell> cells;
  json oracle = json::array();
  for (std::size_t b : spec.block_sizes) {
    const auto outcomes = run_replicas(spec, b);
    if (o.metric != "qmae") {
      std::vector<double> mse;
      std::vector<double> nominal;
      for (const auto& r : outcomes) {
        mse.push_back(r.mse);
        nominal.push_back(r.mse_nominal);
      }
      for (auto [name, values] : {std::pair{"mse", &mse}, std::pair{"mse_nominal", &nominal}}) {
        McCell c;
        c.design = std::string(to_string(spec.design));
        c.true_snr_db = spec.true_snr.value;
        c.b = b;
        c.metric = name;
        c.count = values->size();
        std::tie(c.mean, c.standard_error) = mean_and_standard_error(*values);
        cells.push_back(c);
      }
    }
    if (o.metric != "mse") {
      auto q = quantile_mae(spec, b, outcomes);
      for (auto& c : q.report.cells) cells.push_back(std::move(c));
      json qs = json::array();
      for (double v : q.oracle.quantiles) qs.push_back(number_or_null(v));
      oracle.push_back({{"b", b},
                        {"levels", q.oracle.levels},
                        {"quantiles_db", qs},
                        {"draws", q.oracle.draws},
                        {"approximate", true}});
    }
  }

  json cells_json = json::array();
  for (const auto& c : cells) cells_json.push_back(cell_json(c, o.fs));
  json report = {{"schema_version", kSchemaVersion},
                 {"command", "mc"},
                 {"config",
                  {{"design", std::string(to_string(spec.design))},
                   {"true_snr_db", spec.true_snr.value},
                   {"fs", spec.sample_rate_hz},
                   {"duration_s", spec.duration_s},
                   {"block_sizes", spec.block_sizes},
                   {"k", spec.k_blocks},
                   {"replicas", spec.replicas},
                   {"seed", spec.seed},
                   {"levels", spec.levels},
                   {"metric", o.metric},
                   {"quick", o.quick},
                   {"oracle_series", spec.oracle_series},
                   {"oracle_blocks_per_series", spec.oracle_blocks_per_series}}},
                 {"oracle", oracle},
                 {"cells", cells_json}};

  if (!o.csv.empty()) {
    auto f = open_text(o.csv);
    f << "design,true_snr_db,b,b_ms,metric,level,mean,se,count,valid\n";
    for (const auto& c : cells) {
      f << c.design << ',' << c.true_snr_db << ',' << c.b << ','
        << 1000.0 * static_cast<double>(c.b) / o.fs << ',' << c.metric << ',';
      if (c.level) f << *c.level;
      f << ',';
      if (c.valid) f << c.mean;
      f << ',';
      if (c.valid && c.count > 1) f << c.standard_error;
      f << ',' << c.count << ',' << (c.valid ? 1 : 0) << '\n';
    }
  }
  emit(report, o.out, out);
  return 0;
}

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
  json doc = {{"schema_version", kSchemaVersion},
              {"error", {{"code", code}, {"message", message}}}};
  err << doc.dump() << "\n";
}

} // namespace

std::size_t ms_to_samples(double ms, double sample_rate_hz) {
  if (!(ms > 0.0) || !(sample_rate_hz > 0.0)) {
    throw Error("bad_block", "block duration and sample rate must be positive");
  }
  return static_cast<std::size_t>(std::floor(ms * sample_rate_hz / 1000.0 + 0.5));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subsampling inference for the signal-to-noise ratio of long time series"};
  app.name("snrsub");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic design series");
  simulate->add_option("--design", sim.design, "ar | p1 | p2 | sine-only | noise-only");
  simulate->add_option("--snr", sim.snr, "True SNR in dB");
  simulate->add_option("--fs", sim.fs, "Sample rate in Hz");
  simulate->add_option("--duration", sim.duration, "Duration in seconds");
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--noise-variance", sim.noise_variance, "Noise variance");
  simulate->add_option("--amplitude", sim.amplitude, "Sine amplitude for sine-only");
  simulate->add_option("--format", sim.format, "raw_f64le | wav16");
  simulate->add_option("--out,-o", sim.out, "Output data file")->required();
  simulate->add_option("--manifest", sim.manifest, "Manifest path (default: <out>.json)");

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the subsample SNR distribution");
  est.input.add_to(*estimate);
  est.block.add_to(*estimate);
  estimate->add_option("--b1", est.b1, "Secondary block length (default floor(b^0.4), min 4)");
  estimate->add_option("--k", est.k, "Number of blocks");
  estimate->add_option("--seed", est.seed, "Random seed");
  estimate->add_option("--levels", est.levels, "Quantile levels")->delimiter(',');
  estimate->add_option("--ci", est.ci, "Confidence levels")->delimiter(',');
  estimate->add_option("--threads", est.threads, "Worker threads (default SNRSUB_THREADS)");
  estimate->add_flag("--shared-bandwidth", est.shared_bandwidth,
                     "Select the bandwidth on the first block only");
  estimate->add_flag("--timings", est.timings, "Include wall-clock timings in the report");
  estimate->add_option("--out,-o", est.out, "JSON report path (default stdout)");
  estimate->add_option("--values-csv", est.values_csv, "Write per-block statistics as CSV");

  SelectOptions sel;
  auto* select = app.add_subcommand("select-block", "Choose the block length by minimal volatility");
  sel.input.add_to(*select);
  select->add_option("--grid-min", sel.grid_min, "Smallest candidate");
  select->add_option("--grid-max", sel.grid_max, "Largest candidate");
  select->add_option("--grid-steps", sel.grid_steps, "Number of equispaced candidates");
  select->add_option("--grid-unit", sel.grid_unit, "ms | s");
  select->add_option("--k", sel.k, "Number of blocks per candidate");
  select->add_option("--seed", sel.seed, "Random seed");
  select->add_option("--threads", sel.threads, "Worker threads");
  select->add_option("--out,-o", sel.out, "JSON report path (default stdout)");
  select->add_option("--table-csv", sel.table_csv, "Write the candidate table as CSV");

  BandwidthOptions bw;
  auto* bandwidth = app.add_subcommand("bandwidth", "Dump the CV curve of one block");
  bw.input.add_to(*bandwidth);
  bw.block.add_to(*bandwidth);
  bandwidth->add_option("--start", bw.start, "0-based first sample of the block");
  bandwidth->add_option("--out,-o", bw.out, "CSV path (default stdout)");
  bandwidth->add_option("--summary", bw.summary, "Write a JSON summary");

  McOptions mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo evaluation on a simulated design");
  mc_cmd->add_option("--design", mc.design, "ar | p1 | p2");
  mc_cmd->add_option("--snr", mc.snr, "True SNR in dB");
  mc_cmd->add_option("--fs", mc.fs, "Sample rate in Hz");
  mc_cmd->add_option("--duration", mc.duration, "Duration in seconds");
  mc_cmd->add_option("--block-ms", mc.block_ms, "Block lengths in ms")->delimiter(',');
  mc_cmd->add_option("--k", mc.k, "Number of blocks");
  mc_cmd->add_option("--replicas", mc.replicas, "Monte Carlo replicas");
  mc_cmd->add_option("--seed", mc.seed, "Master seed");
  mc_cmd->add_option("--levels", mc.levels, "Quantile levels")->delimiter(',');
  mc_cmd->add_option("--metric", mc.metric, "mse | qmae | all");
  mc_cmd->add_flag("--quick", mc.quick, "At most 10 replicas and a small oracle");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads");
  mc_cmd->add_option("--out,-o", mc.out, "JSON report path (default stdout)");
  mc_cmd->add_option("--csv", mc.csv, "Write the cells as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*estimate) return cmd_estimate(est, out);
    if (*select) return cmd_select_block(sel, out);
    if (*bandwidth) return cmd_bandwidth(bw, out);
    if (*mc_cmd) return cmd_mc(mc, out);
  } catch (const Error& e) {
    report_error(err, e.code(), e.what());
    return kExitError;
  } catch (const std::invalid_argument& e) {
    report_error(err, "invalid_argument", e.what());
    return kExitError;
  } catch (const std::domain_error& e) {
    report_error(err, "domain_error", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}

} // namespace snrsub::app
