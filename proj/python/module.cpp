#include "snrsub/core.hpp"
#include "snrsub/harness.hpp"
#include "snrsub/io.hpp"
#include "snrsub/simgen.hpp"
#include "snrsub/smoother.hpp"
#include "snrsub/subsample.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace snrsub;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict fit_dict(const KernelFit& fit) {
  py::list curve;
  for (const auto& p : fit.cv_curve) curve.append(py::make_tuple(p.h, p.cv, p.m_lags));
  py::dict d;
  d["fitted"] = to_array(fit.fitted);
  d["residuals"] = to_array(fit.residuals);
  d["h_hat"] = fit.h_hat;
  d["m_lags"] = fit.m_lags;
  d["cv_curve"] = curve;
  return d;
}

NoiseSpec make_noise(const std::string& kind, double variance, double param) {
  if (kind == "white") return WhiteNoise{variance};
  if (kind == "ar1") return Ar1Noise{param, variance};
  if (kind == "powerlaw") return PowerLawNoise{param, variance};
  throw Error("bad_noise", "noise kind must be white, ar1 or powerlaw");
}

} // namespace

PYBIND11_MODULE(_snrsub, m) {
  m.doc() = "Subsampling inference for the signal-to-noise ratio of long time series";

  py::register_exception<Error>(m, "SnrsubError", PyExc_ValueError);

  m.def("snr_db", [](double ps, double pn) { return snr_db(ps, pn).value; }, py::arg("p_signal"),
        py::arg("p_noise"));
  m.def("empirical_quantile",
        [](const Array& v, double level) { return empirical_quantile(view(v), QuantileLevel(level)); },
        py::arg("values"), py::arg("level"));
  m.def("calibrate_amplitude",
        [](double snr, double var) { return calibrate_amplitude(SnrDb{snr}, var); },
        py::arg("snr_db"), py::arg("noise_variance"));
  m.def("default_secondary_block", &default_secondary_block, py::arg("b"));

  m.def("epanechnikov", &epanechnikov, py::arg("u"));
  m.def("priestley_chao_fit",
        [](const Array& y, double h) { return to_array(priestley_chao_fit(view(y), h)); },
        py::arg("y"), py::arg("h"));
  m.def("cv_objective",
        [](const Array& y, double h, std::size_t m_lags) { return cv_objective(view(y), h, m_lags); },
        py::arg("y"), py::arg("h"), py::arg("m_lags"));
  m.def("select_bandwidth",
        [](const Array& y, double c1, double c2, std::size_t points) {
          return fit_dict(select_bandwidth(view(y), std::nullopt, BandwidthGrid{c1, c2, points}));
        },
        py::arg("y"), py::arg("c1") = 0.05, py::arg("c2") = 1.0, py::arg("points") = 25);

  m.def("gen_noise",
        [](const std::string& kind, std::size_t n, double variance, double param,
           std::uint64_t seed) { return to_array(gen_noise(make_noise(kind, variance, param), n, seed)); },
        py::arg("kind"), py::arg("n"), py::arg("variance") = 1.0, py::arg("param") = 0.0,
        py::arg("seed") = 0);
  m.def("gen_design",
        [](const std::string& design, double snr, double fs, double duration, std::uint64_t seed) {
          DesignParams p;
          p.design = parse_design(design);
          p.target_snr = SnrDb{snr};
          p.sample_rate_hz = fs;
          p.duration_s = duration;
          const DesignSample s = gen_design(p, seed);
          py::dict d;
          d["series"] = to_array(s.series.samples());
          d["signal"] = to_array(s.signal);
          d["noise"] = to_array(s.noise);
          d["amplitude"] = s.amplitude;
          d["true_signal_power"] = s.true_signal_power();
          return d;
        },
        py::arg("design") = "ar", py::arg("snr_db") = 10.0, py::arg("fs") = 44100.0,
        py::arg("duration_s") = 3.0, py::arg("seed") = 0);

  m.def("draw_blocks", &draw_blocks, py::arg("n"), py::arg("b"), py::arg("k"), py::arg("seed"));

  py::class_<SnrDistribution>(m, "SnrDistribution")
      .def_property_readonly("values", [](const SnrDistribution& d) { return to_array(d.values()); })
      .def_property_readonly("starts",
                             [](const SnrDistribution& d) {
                               std::vector<std::size_t> s;
                               for (const auto& e : d.estimates()) s.push_back(e.start);
                               return s;
                             })
      .def_property_readonly("skipped", &SnrDistribution::skipped)
      .def("__len__", &SnrDistribution::size)
      .def("quantile", [](const SnrDistribution& d, double l) { return d.quantile(QuantileLevel(l)); },
           py::arg("level"))
      .def("median", &SnrDistribution::median)
      .def("median_bandwidth", &SnrDistribution::median_bandwidth)
      .def("confidence_interval",
           [](const SnrDistribution& d, double level) {
             const auto [lo, hi] = confidence_interval(d, level);
             return py::make_tuple(lo.value, hi.value);
           },
           py::arg("level") = 0.9);

  m.def("estimate",
        [](const Array& y, double fs, std::size_t b, std::size_t b1, std::size_t k,
           std::uint64_t seed, unsigned threads, bool shared_bandwidth) {
          SubsampleConfig cfg;
          cfg.b = b;
          cfg.b1 = b1;
          cfg.k_blocks = k;
          cfg.seed = seed;
          cfg.threads = threads;
          cfg.shared_bandwidth = shared_bandwidth;
          const auto v = view(y);
          const TimeSeries series(std::vector<double>(v.begin(), v.end()), fs);
          py::gil_scoped_release release;
          return estimate_snr_distribution(series, cfg);
        },
        py::arg("y"), py::arg("fs"), py::arg("b"), py::arg("b1") = 0, py::arg("k") = 200,
        py::arg("seed") = 0, py::arg("threads") = 1, py::arg("shared_bandwidth") = false);

  m.def("select_block_size",
        [](const Array& y, double fs, const std::vector<std::size_t>& candidates, std::size_t k,
           std::uint64_t seed, unsigned threads) {
          const auto v = view(y);
          const TimeSeries series(std::vector<double>(v.begin(), v.end()), fs);
          SubsampleConfig cfg;
          cfg.k_blocks = k;
          cfg.seed = seed;
          cfg.threads = threads;
          const BlockSelection sel = select_block_size(series, candidates, cfg);
          py::list rows;
          for (const auto& c : sel.candidates) {
            py::dict r;
            r["b"] = c.b;
            r["b1"] = c.b1;
            r["q05"] = c.q_low;
            r["q95"] = c.q_high;
            r["volatility"] = c.volatility ? py::cast(*c.volatility) : py::none();
            r["degenerate"] = c.degenerate;
            rows.append(r);
          }
          return py::make_tuple(sel.chosen_b, rows);
        },
        py::arg("y"), py::arg("fs"), py::arg("candidates"), py::arg("k") = 200, py::arg("seed") = 0,
        py::arg("threads") = 1);

  m.def("read_input",
        [](const std::string& path, const std::string& format, std::optional<double> fs,
           std::size_t channel) {
          const TimeSeries ts = read_input({path, parse_input_format(format), fs, channel});
          return py::make_tuple(to_array(ts.samples()), ts.sample_rate_hz());
        },
        py::arg("path"), py::arg("format") = "wav16", py::arg("fs") = py::none(),
        py::arg("channel") = 0);
}
