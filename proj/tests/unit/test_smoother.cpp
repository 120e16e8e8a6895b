#include "snrsub/simgen.hpp"
#include "snrsub/smoother.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace snrsub;

namespace {

std::vector<double> sine_plus(const std::vector<double>& noise) {
  const std::size_t n = noise.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n)) +
           noise[i];
  }
  return y;
}

} // namespace

TEST_SUITE("smoother") {

TEST_CASE("epanechnikov point values") {
  CHECK(epanechnikov(0.0) == 0.75);
  CHECK(epanechnikov(1.0) == 0.0);
  CHECK(epanechnikov(-1.0) == 0.0);
  CHECK(epanechnikov(0.5) == 0.5625);
  CHECK(epanechnikov(1.5) == 0.0);
}

TEST_CASE("constant reproduction for every grid h") {
  for (std::size_t n : {3u, 16u, 100u, 441u}) {
    std::vector<double> y(n, -2.5);
    std::vector<double> hs{0.5};
    if (n >= 16) hs = BandwidthGrid{}.values(n, DependenceRegime::srd());
    for (double h : hs) {
      for (double v : priestley_chao_fit(y, h)) CHECK(v == doctest::Approx(-2.5).epsilon(1e-14));
    }
  }
}

TEST_CASE("linearity") {
  const auto y = gen_white(1.0, 200, 1);
  const auto z = gen_white(1.0, 200, 2);
  std::vector<double> combo(200);
  for (std::size_t i = 0; i < 200; ++i) combo[i] = 2.0 * y[i] - 0.5 * z[i];
  for (double h : {0.02, 0.1, 0.4}) {
    const auto fy = priestley_chao_fit(y, h);
    const auto fz = priestley_chao_fit(z, h);
    const auto fc = priestley_chao_fit(combo, h);
    for (std::size_t i = 0; i < 200; ++i) CHECK(fc[i] == doctest::Approx(2.0 * fy[i] - 0.5 * fz[i]));
  }
}

TEST_CASE("fit matches brute force on small n") {
  const std::vector<double> y5{0, 1, 0, 1, 0};
  const auto fit = priestley_chao_fit(y5, 0.25);
  // Hand evaluation at t = 3/5: neighbours i = 2, 3, 4 with u = 0.8, 0, -0.8.
  const double w0 = 0.75;
  const double w1 = 0.75 * (1.0 - 0.64);
  CHECK(fit[2] == doctest::Approx((w1 * 1 + w0 * 0 + w1 * 1) / (w0 + 2 * w1)).epsilon(1e-14));
  CHECK(priestley_chao_at(y5, 0.25, 0.6) == doctest::Approx(fit[2]).epsilon(1e-14));

  const auto y = gen_ar1(0.5, 1.0, 256, 9);
  for (double h : {0.01, 0.03, 0.11, 0.37}) {
    const auto a = priestley_chao_fit(y, h);
    const auto b = oracle::pc_fit(y, h);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(oracle::rel_close(a[i], b[i], 1e-12));
  }
}

TEST_CASE("argument checks") {
  CHECK_THROWS((void)priestley_chao_fit(std::vector<double>{1, 2}, 0.1));
  CHECK_THROWS((void)priestley_chao_fit(std::vector<double>{1, 2, 3}, 0.0));
  CHECK_THROWS((void)priestley_chao_fit(std::vector<double>{1, 2, 3}, 0.6));
}

TEST_CASE("autocovariance") {
  const std::vector<double> e{1, -1, 1, -1};
  CHECK(autocovariance(e, 0) == 1.0);
  CHECK(autocovariance(e, 1) == -0.75);
  const std::vector<double> r{0.3, 2.0, -1.0, 4.5};
  CHECK(autocovariance(r, 3) == doctest::Approx(0.3 * 4.5 / 4.0));
  CHECK_THROWS((void)autocovariance(e, 4));
}

TEST_CASE("lag count rule") {
  CHECK(cv_lag_count(441, 0.01) == 2);
  CHECK(cv_lag_count(441, 0.001) == 1);
  CHECK(cv_lag_count(16, 0.5) == 2);
  CHECK(cv_lag_count(2048, 0.2) == 20);
  CHECK(cv_lag_count(16, 0.5) <= 4);
}

TEST_CASE("cv objective matches brute force on n <= 256") {
  const auto y64 = gen_ar1(-0.7, 1.0, 64, 4);
  const auto hs = BandwidthGrid{0.05, 1.0, 10}.values(64, DependenceRegime::srd());
  REQUIRE(hs.size() == 10);
  for (double h : hs) {
    const std::size_t m = cv_lag_count(64, h);
    const double a = cv_objective(y64, h, m);
    const double b = oracle::cv(y64, h, m);
    if (std::isinf(b)) {
      CHECK(std::isinf(a));
    } else {
      CHECK(oracle::rel_close(a, b, 1e-12));
    }
  }
  for (std::size_t n : {32u, 100u, 256u}) {
    const auto y = sine_plus(gen_white(0.05, n, n));
    for (double h : BandwidthGrid{}.values(n, DependenceRegime::srd())) {
      for (std::size_t m : {std::size_t{1}, cv_lag_count(n, h), n / 4}) {
        const double a = cv_objective(y, h, m);
        const double b = oracle::cv(y, h, m);
        if (std::isinf(b)) {
          CHECK(std::isinf(a));
        } else {
          CHECK(oracle::rel_close(a, b, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("cv objective limits") {
  // iid noise, M = 1: the factor is close to 1 - K(0)/(nh).
  const std::size_t n = 4096;
  const auto y = gen_white(1.0, n, 17);
  const double h = 0.05;
  const double plain = cv_objective(y, h, 1, CvCorrection::Independent);
  const double corrected = cv_objective(y, h, 1);
  CHECK(corrected == doctest::Approx(plain).epsilon(0.02));

  // Perfect fit: a constant has zero residuals.
  const std::vector<double> c(64, 3.0);
  CHECK(cv_objective(c, 0.1, 2) == 0.0);

  CHECK_THROWS((void)cv_objective(y, h, 0));
  CHECK_THROWS((void)cv_objective(std::vector<double>(16, 1.0), 0.3, 5));
}

TEST_CASE("select_bandwidth picks the argmin of its recorded curve") {
  const auto y = sine_plus(gen_ar1(-0.7, 0.04, 441, 8));
  const BandwidthGrid grid;
  const auto fit = select_bandwidth(y, std::nullopt, grid);
  const auto hs = grid.values(441, DependenceRegime::srd());
  REQUIRE(fit.cv_curve.size() == hs.size());
  double best = INFINITY;
  double best_h = 0.0;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    CHECK(fit.cv_curve[k].h == hs[k]);
    CHECK(fit.cv_curve[k].m_lags == cv_lag_count(441, hs[k]));
    if (fit.cv_curve[k].cv < best) {
      best = fit.cv_curve[k].cv;
      best_h = hs[k];
    }
  }
  CHECK(fit.h_hat == best_h);
  CHECK(fit.fitted.size() == y.size());
  CHECK(fit.residuals.size() == y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(std::isfinite(fit.fitted[i]));
    CHECK(fit.residuals[i] == doctest::Approx(y[i] - fit.fitted[i]));
  }
  CHECK_THROWS((void)select_bandwidth(std::vector<double>(15, 1.0), std::nullopt, grid));
}

TEST_CASE("grid values") {
  const BandwidthGrid grid;
  const auto hs = grid.values(441, DependenceRegime::srd());
  CHECK(hs.size() == 25);
  CHECK(hs.front() == doctest::Approx(0.05 * std::pow(441.0, -0.2)));
  for (std::size_t k = 1; k < hs.size(); ++k) CHECK(hs[k] > hs[k - 1]);
  for (double h : hs) CHECK(h <= 0.5);
  // Small windows clamp at 0.5 and drop duplicates.
  const auto small = grid.values(16, DependenceRegime::srd());
  CHECK(small.back() == 0.5);
  CHECK_THROWS(BandwidthGrid{0.5, 0.1, 10}.validate());
  CHECK_THROWS(BandwidthGrid{0.1, 0.5, 1}.validate());
}

TEST_CASE("noiseless limit drives the error to zero") {
  const std::size_t n = 512;
  double prev = INFINITY;
  for (double sd : {0.1, 0.01, 0.001}) {
    const auto y = sine_plus(gen_white(sd * sd, n, 21));
    const auto fit = select_bandwidth(y, std::nullopt, BandwidthGrid{});
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / n);
      err += (fit.fitted[i] - s) * (fit.fitted[i] - s);
    }
    err = std::sqrt(err / n);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("interior sup error shrinks with h on noiseless input") {
  const std::size_t n = 2048;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / n);
  }
  double prev = INFINITY;
  for (double h : {0.3, 0.2, 0.1, 0.05, 0.02}) {
    const auto fit = priestley_chao_fit(y, h);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i + 1) / n;
      if (t > h && t < 1.0 - h) sup = std::max(sup, std::abs(fit[i] - y[i]));
    }
    CHECK(sup < prev);
    // Second-order bias: sup error / h^2 stays bounded.
    CHECK(sup / (h * h) < 4.0);
    prev = sup;
  }
}

TEST_CASE("dependent correction changes the choice under AR(-0.7) noise") {
  const std::size_t n = 2048;
  int differ = 0;
  for (int r = 0; r < 20; ++r) {
    const auto y = sine_plus(gen_ar1(-0.7, 0.01, n, derive_seed(9, r)));
    const auto a = select_bandwidth(y, std::nullopt, BandwidthGrid{});
    const auto b = select_bandwidth(y, std::nullopt, BandwidthGrid{}, CvCorrection::Independent);
    differ += a.h_hat != b.h_hat ? 1 : 0;
  }
  CHECK(differ > 10);
}

TEST_CASE("mise probe") {
  const std::vector<std::size_t> ns{256, 1024};
  auto sig = [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
  const auto rows = mise_probe(sig, WhiteNoise{0.01}, ns, 10, 3, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].replicas == 10);
  CHECK(rows[1].mise < rows[0].mise);
  CHECK_THROWS((void)mise_probe(sig, WhiteNoise{0.01}, ns, 9, 3, 1));
  const auto again = mise_probe(sig, WhiteNoise{0.01}, ns, 10, 3, 2);
  CHECK(again[0].mise == rows[0].mise);
}

}
