#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <bmc/estimators.hpp>
#include <bmc/rng.hpp>
#include <bmc/wavelet.hpp>

using namespace bmc;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double energy(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

}  // namespace

TEST_CASE("Haar and db2 filters") {
  const auto haar = daubechies_filter(1);
  REQUIRE(haar.size() == 2);
  CHECK(haar[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(haar[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // Closed form of the 4-tap filter: (1 + s, 3 + s, 3 - s, 1 - s) / (4 sqrt 2), s = sqrt 3.
  const double s3 = std::sqrt(3.0), n = 4.0 * std::sqrt(2.0);
  const std::vector<double> db2{(1 + s3) / n, (3 + s3) / n, (3 - s3) / n, (1 - s3) / n};
  const auto h = daubechies_filter(2);
  REQUIRE(h.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(h[k] - db2[k]) < 1e-12);

  CHECK_THROWS(daubechies_filter(0));
  CHECK_THROWS(daubechies_filter(11));
}

TEST_CASE("Daubechies filters are orthonormal with p vanishing moments") {
  for (int p = 1; p <= 10; ++p) {
    CAPTURE(p);
    const auto h = daubechies_filter(p);
    REQUIRE(h.size() == static_cast<std::size_t>(2 * p));
    CHECK(std::abs(std::accumulate(h.begin(), h.end(), 0.0) - std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(energy(h) - 1.0) < 1e-12);
    for (int m = 1; m < p; ++m) {
      double s = 0.0;
      for (int k = 0; k + 2 * m < 2 * p; ++k) s += h[k] * h[k + 2 * m];
      CHECK(std::abs(s) < 1e-10);
    }
    const auto g = quadrature_mirror(h);
    // Moments about the filter centre; raw-index moments of high order lose
    // digits to cancellation.
    const double centre = (2.0 * p - 1.0) / 2.0;
    const double tol = p <= 8 ? 1e-8 : 1e-6;
    for (int m = 0; m < p; ++m) {
      double s = 0.0;
      for (int k = 0; k < 2 * p; ++k) s += std::pow(k - centre, m) * g[k];
      CHECK(std::abs(s) < tol);
    }
  }
}

TEST_CASE("Haar transform equals the brute-force orthogonal matrix") {
  const int J = 4;
  const std::size_t n = 16;
  for (int j0 : {0, 2}) {
    CAPTURE(j0);
    // Rows: approximation at level j0, then details of levels j0 .. J-1.
    std::vector<std::vector<double>> W;
    const std::size_t approx_width = n >> j0;
    for (std::size_t k = 0; k < (std::size_t{1} << j0); ++k) {
      std::vector<double> row(n, 0.0);
      for (std::size_t i = 0; i < approx_width; ++i) row[k * approx_width + i] = 1.0 / std::sqrt(double(approx_width));
      W.push_back(row);
    }
    for (int j = j0; j < J; ++j) {
      const std::size_t width = n >> j;
      for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
        std::vector<double> row(n, 0.0);
        for (std::size_t i = 0; i < width; ++i)
          row[k * width + i] = (i < width / 2 ? 1.0 : -1.0) / std::sqrt(double(width));
        W.push_back(row);
      }
    }
    REQUIRE(W.size() == n);
    const auto spec = make_wavelet(1, j0);
    const Box box = Box::cube({0.0, 1.0}, 1);
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<double> unit(n, 0.0);
      unit[e] = 1.0;
      const auto p = dwt_forward(unit, box, spec);
      for (std::size_t r = 0; r < n; ++r) CHECK(std::abs(p.values[r] - W[r][e]) < 1e-12);
    }
  }
}

TEST_CASE("round trip and energy conservation in 1, 2 and 3 dimensions") {
  const auto spec = make_wavelet(8, 2);
  struct Case { int d; int J; };
  for (auto c : {Case{1, 12}, Case{1, 5}, Case{2, 6}, Case{2, 4}, Case{3, 6}, Case{3, 3}}) {
    CAPTURE(c.d);
    CAPTURE(c.J);
    const std::size_t n = std::size_t{1} << (c.J * c.d);
    const auto x = random_vector(n, 100 + c.d * 10 + c.J);
    const Box box = Box::cube({-1.0, 2.0}, c.d);
    const auto p = dwt_forward(x, box, spec);
    CHECK(p.values.size() == n);
    CHECK(p.J == c.J);
    CHECK(std::abs(energy(p.values) - energy(x)) < 1e-10 * std::max(1.0, energy(x)));
    CHECK(sup_diff(dwt_inverse(p, spec), x) < 1e-10);
  }
}

TEST_CASE("axis order does not change the pyramid") {
  const auto spec = make_wavelet(4, 1);
  for (int d : {2, 3}) {
    const int J = d == 2 ? 5 : 4;
    const auto x = random_vector(std::size_t{1} << (J * d), 7 + d);
    const Box box = Box::cube({0.0, 1.0}, d);
    const auto ref = dwt_forward(x, box, spec);
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    while (std::next_permutation(order.begin(), order.end())) {
      const auto p = dwt_forward(x, box, spec, order);
      CHECK(sup_diff(p.values, ref.values) < 1e-12);
    }
  }
}

TEST_CASE("constant input has no details") {
  const auto spec = make_wavelet(8, 2);
  for (int d : {1, 2, 3}) {
    const int J = d == 1 ? 8 : 4;
    const std::vector<double> x(std::size_t{1} << (J * d), 3.25);
    const auto p = dwt_forward(x, Box::cube({0.0, 1.0}, d), spec);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      if (coeff_position(p, i).level >= 0) CHECK(std::abs(p.values[i]) < 1e-12);
  }
}

TEST_CASE("pyramid layout") {
  const auto spec = make_wavelet(2, 1);
  const auto p = dwt_forward(random_vector(64, 1), Box::cube({0.0, 1.0}, 2), spec);
  REQUIRE(p.J == 3);
  CHECK(p.detail_count() == 64 - 4);
  CHECK(coeff_position(p, 0).level == -1);
  // Row-major side 8: flat 2 is (0, 2), in the level-1 shell, axis-1 highpass.
  const auto pos = coeff_position(p, 2);
  CHECK(pos.level == 1);
  CHECK(pos.orientation == 2);
  CHECK(pos.index[0] == 0);
  CHECK(pos.index[1] == 0);
  const auto last = coeff_position(p, 63);
  CHECK(last.level == 2);
  CHECK(last.orientation == 3);
  CHECK_THROWS(dwt_forward(random_vector(48, 1), Box::cube({0.0, 1.0}, 1), spec));
  CHECK_THROWS(dwt_forward(random_vector(32, 1), Box::cube({0.0, 1.0}, 2), spec));
}

TEST_CASE("hard threshold") {
  const auto spec = make_wavelet(8, 2);
  const auto p = dwt_forward(random_vector(256, 3), Box::cube({0.0, 1.0}, 1), spec);
  CHECK(hard_threshold(p, 0.0).values == p.values);
  double max_detail = 0.0;
  for (std::size_t i = 4; i < p.values.size(); ++i) max_detail = std::max(max_detail, std::abs(p.values[i]));
  const auto zeroed = hard_threshold(p, max_detail * 1.01);
  CHECK(zeroed.nonzero_details() == 0);
  CHECK(zeroed.kept_fraction == 0.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(zeroed.values[i] == p.values[i]);

  Rng rng(4, 4);
  for (int t = 0; t < 50; ++t) {
    const double e1 = rng.uniform() * max_detail, e2 = e1 + rng.uniform() * max_detail;
    const auto a = hard_threshold(p, e1), b = hard_threshold(p, e2);
    CHECK(hard_threshold(a, e1).values == a.values);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      if (a.values[i] == 0.0) CHECK(b.values[i] == 0.0);
    CHECK(b.kept_fraction <= a.kept_fraction);
  }
}

TEST_CASE("truncation keeps coarse levels only") {
  const auto spec = make_wavelet(3, 1);
  const auto p = dwt_forward(random_vector(128, 5), Box::cube({0.0, 1.0}, 1), spec);
  const auto t = truncate_levels(p, 4);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const auto pos = coeff_position(p, i);
    CHECK(t.values[i] == (pos.level >= 4 ? 0.0 : p.values[i]));
  }
}

TEST_CASE("binning") {
  const Box box = Box::cube({2.0, 4.0}, 2);
  const std::vector<double> pts{2.1, 3.9, 2.2, 3.8, 2.15, 3.95};
  const int J = 3;
  const auto b = bin_empirical(pts, box, J);
  const double vol_scale = 1.0 / std::sqrt(box.volume());
  const double full = std::pow(2.0, J * 2 / 2.0) * vol_scale;
  // (2.1, 3.9) falls in bin (0, 7) of an 8 x 8 grid.
  for (std::size_t k = 0; k < b.coeffs.size(); ++k) CHECK(b.coeffs[k] == doctest::Approx(k == 7 ? full : 0.0));

  const std::vector<double> mixed{2.5, 3.5, 5.0, 3.0, 4.0, 4.0, 1.0, 1.0};
  const auto m = bin_empirical(mixed, box, J);
  double mass = 0.0;
  for (double c : m.coeffs) mass += c / full;
  CHECK(mass == doctest::Approx(0.5));
  CHECK(m.out_of_domain_fraction == doctest::Approx(0.5));
  CHECK(m.sample_size == 4);
  CHECK_THROWS(bin_empirical(std::vector<double>{}, Box::cube({0.0, 1.0}, 1), 3));

  Rng rng(6, 6);
  std::vector<double> u(1000000);
  for (auto& x : u) x = rng.uniform();
  const auto h = bin_empirical(u, Box::cube({0.0, 1.0}, 1), 8);
  const double scale = std::pow(2.0, 8 / 2.0);
  double worst = 0.0;
  for (double c : h.coeffs) worst = std::max(worst, std::abs(c / scale - 1.0 / 256) * 256);
  CHECK(worst < 5.0 * std::sqrt(256.0 / 1e6));
}

TEST_CASE("evaluation inverts the binning normalisation") {
  Rng rng(12, 0);
  std::vector<double> pts(5000);
  for (auto& x : pts) x = 1.0 + 3.0 * rng.uniform() * rng.uniform();
  const Box box = Box::cube({1.5, 3.5}, 1);
  const int J = 6;
  const auto spec = make_wavelet(8, 2);
  const auto binned = bin_empirical(pts, box, J);
  const auto est = evaluate_on_grid(dwt_forward(binned, spec), spec);
  const double width = 2.0 / 64.0;
  std::vector<double> counts(64, 0.0);
  std::size_t inside = 0;
  for (double x : pts) {
    if (x < 1.5 || x > 3.5) continue;
    ++inside;
    counts[std::min<std::size_t>(63, static_cast<std::size_t>((x - 1.5) / width))] += 1.0;
  }
  for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(est.values[k] - counts[k] / (5000.0 * width)) < 1e-10);
  CHECK(std::abs(est.integral() - static_cast<double>(inside) / 5000.0) < 1e-10);
  CHECK(est.grid_point(0, 0) == doctest::Approx(1.5 + width / 2));
  CHECK(est.value_at(1.5 + width / 2) == doctest::Approx(est.values[0]));
  CHECK(est.value_at(1.5 + width) == doctest::Approx(0.5 * (est.values[0] + est.values[1])));
}

TEST_CASE("thresholding uniform noise leaves a flat estimate") {
  Rng rng(99, 0);
  const std::size_t N = 1 << 15;
  std::vector<double> pts(N);
  for (auto& x : pts) x = rng.uniform();
  const auto spec = make_wavelet(8, 2);
  const int J = theorem_level(static_cast<double>(N), 1);
  const double eta = theorem_threshold(Target::nu, 10.0, static_cast<double>(N));
  const auto est = threshold_estimate(pts, Box::cube({0.0, 1.0}, 1), J, eta, spec);
  const double mean = std::accumulate(est.values.begin(), est.values.end(), 0.0) / est.values.size();
  double dev = 0.0;
  for (double v : est.values) dev = std::max(dev, std::abs(v - mean));
  CHECK(dev < 0.1 * mean);
}

TEST_CASE("pyramid and grid CSV dumps") {
  const auto spec = make_wavelet(2, 1);
  const auto p = dwt_forward(random_vector(16, 8), Box::cube({0.0, 1.0}, 2), spec);
  std::ostringstream s;
  write_pyramid_csv(s, p);
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "level,orientation,index0,index1,value");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 16);

  const auto est = evaluate_on_grid(p, spec);
  std::ostringstream g;
  write_grid_csv(g, est);
  CHECK(g.str().rfind("x,y,value\n", 0) == 0);
}
