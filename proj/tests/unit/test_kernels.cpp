#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <bmc/config.hpp>
#include <bmc/kernels.hpp>
#include <bmc/quadrature.hpp>
#include <bmc/trial_rate.hpp>

using namespace bmc;

namespace {

GrowthFragModel gf(TrialRate r) { return GrowthFragModel(2.0, r.splitting_rate()); }

// Trapezoid integral of B(2z)/(tau z) on a fine grid, independent of the
// closed form used by the model.
double hazard_by_trapezoid(const TrialRate& r, double tau, double a, double b, int steps = 200000) {
  const double h = (b - a) / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double z = a + i * h;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    s += w * r(2.0 * z) / (tau * z);
  }
  return s * h;
}

// Integral of Q_B(x, .) over [a, b] with y = 5/2 - t^2, which removes the
// (5 - 2y)^(1/tau - 1) singularity at the upper edge; split at the spike kinks.
double integrate_q(const GrowthFragModel& m, const TrialRate& r, double x, double a, double b, double tol) {
  std::vector<double> cuts{a};
  if (!r.is_baseline()) {
    const auto s = r.spike_support();
    for (double k : {s.lo / 2, 1.75, s.hi / 2})
      if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    // The transformed integrand tends to a finite limit as t -> 0, but 5/2 - t^2
    // stops resolving t there; below t = 1e-5 it is taken as constant.
    constexpr double kFloor = 1e-5;
    const double y_lo = cuts[k];
    const auto f = [&](double t) { return m.gf_q_density(x, std::max(2.5 - t * t, y_lo)) * 2.0 * t; };
    const double t_hi = std::sqrt(2.5 - cuts[k]), t_lo = std::sqrt(2.5 - cuts[k + 1]);
    if (t_lo < kFloor) {
      total += f(kFloor) * (kFloor - t_lo);
      total += adaptive_simpson(f, kFloor, t_hi, tol);
    } else {
      total += adaptive_simpson(f, t_lo, t_hi, tol);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("tent and trial rates") {
  CHECK(tent(0.0) == 1.0);
  CHECK(tent(-0.5) == doctest::Approx(0.5));
  CHECK(tent(1.5) == 0.0);
  const auto large = TrialRate::large_spike();
  CHECK(large(3.5) == doctest::Approx(3.5 / 1.5 + 3.0));
  CHECK(large(3.0) == doctest::Approx(3.0 / 2.0));
  const auto high = TrialRate::high_spike();
  CHECK(high.spike_support().lo == doctest::Approx(3.5 - 1.0 / 16));
  CHECK(high(3.5 + 1.0 / 32) == doctest::Approx(3.5312500 / 1.46875 + 4.5));
  CHECK_THROWS_AS(large(5.0), std::domain_error);
}

TEST_CASE("closed-form hazard agrees with direct quadrature") {
  for (const auto& r : {TrialRate::baseline(), TrialRate::large_spike(), TrialRate::high_spike()}) {
    for (double a : {0.3, 1.0, 1.6, 1.74}) {
      for (double b : {1.7, 1.75, 1.78, 2.2, 2.45}) {
        if (b <= a) continue;
        CHECK(r.log_integral(a, b) / 2.0 == doctest::Approx(hazard_by_trapezoid(r, 2.0, a, b)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("baseline density matches its closed form") {
  const auto m = gf(TrialRate::baseline());
  const double x = 2.0, y = 1.5, tau = 2.0;
  const double closed = (1.0 / tau) * 2.0 / (5.0 - 2.0 * y) * std::pow((5.0 - 2.0 * y) / (5.0 - x), 1.0 / tau);
  CHECK(std::abs(m.gf_q_density(x, y) - closed) < 1e-8);
  CHECK(m.gf_q_density(2.0, 0.9) == 0.0);
  CHECK_THROWS_AS(m.gf_q_density(2.0, 5.5), std::domain_error);
}

TEST_CASE("growth-fragmentation density is normalised") {
  for (const auto& r : {TrialRate::baseline(), TrialRate::large_spike(), TrialRate::high_spike()}) {
    const auto m = gf(r);
    for (int i = 0; i < 20; ++i) {
      const double x = 0.125 + 0.25 * i;
      CHECK(m.gf_q_density(x, 0.49 * x) == 0.0);
      const double total = integrate_q(m, r, x, x / 2.0, 2.5, 1e-8);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("baseline inverse CDF matches the quadrature CDF") {
  const auto m = gf(TrialRate::baseline());
  const double x = 2.0;
  for (int i = 1; i <= 100; ++i) {
    const double y = 1.0 + 1.49 * i / 100.0;
    const double F = integrate_q(m, TrialRate::baseline(), x, 1.0, y, 1e-12);
    CHECK(std::abs(m.proposal_cdf(x, y) - F) < 1e-8);
    CHECK(m.proposal_quantile(x, m.proposal_cdf(x, y)) == doctest::Approx(y).epsilon(1e-12));
  }
}

TEST_CASE("rejection sampler: support, acceptance and KS distance") {
  for (const auto& r : {TrialRate::large_spike(), TrialRate::high_spike()}) {
    const auto m = gf(r);
    CHECK(m.envelope() >= 1.0);
    Rng rng(2024, r.scale);
    const double x = 2.0;
    const int N = 100000;
    std::vector<double> draws(N);
    std::size_t trials = 0;
    for (auto& y : draws) {
      std::size_t t = 0;
      y = m.gf_sample_child(x, rng, &t);
      trials += t;
      REQUIRE(y >= x / 2.0);
      REQUIRE(y < 2.5);
    }
    const double acceptance = static_cast<double>(N) / static_cast<double>(trials);
    CHECK(std::abs(acceptance - 1.0 / m.envelope()) < 0.02);

    // Reference CDF: cumulative trapezoid of the density on 10^4 cells.
    const int G = 10000;
    const double lo = 1.0, hi = 2.5;
    std::vector<double> grid(G + 1), cdf(G + 1, 0.0);
    for (int i = 0; i <= G; ++i) grid[i] = lo + (hi - lo) * i / G;
    double prev = m.gf_q_density(x, grid[0]);
    for (int i = 1; i <= G; ++i) {
      const double cur = grid[i] < 2.5 ? m.gf_q_density(x, std::min(grid[i], 2.5 - 1e-12)) : 0.0;
      cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
      prev = cur;
    }
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int k = 0; k < N; ++k) {
      const auto it = std::upper_bound(grid.begin(), grid.end(), draws[k]);
      const auto i = std::clamp<std::ptrdiff_t>(it - grid.begin(), 1, G);
      const double w = (draws[k] - grid[i - 1]) / (grid[i] - grid[i - 1]);
      const double F = cdf[i - 1] + w * (cdf[i] - cdf[i - 1]);
      ks = std::max({ks, std::abs(F - static_cast<double>(k) / N), std::abs(F - static_cast<double>(k + 1) / N)});
    }
    CHECK(ks < 0.01);
  }
}

TEST_CASE("baseline proposal is always accepted") {
  const auto m = gf(TrialRate::baseline());
  CHECK(m.envelope() == 1.0);
  Rng rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    std::size_t t = 0;
    m.gf_sample_child(3.0, rng, &t);
    CHECK(t == 1);
  }
}

TEST_CASE("growth-fragmentation pairs are equal") {
  const auto m = gf(TrialRate::high_spike());
  Rng rng(9, 9);
  for (int i = 0; i < 2000; ++i) {
    const double x = 0.01 + 4.98 * rng.uniform();
    const auto [y, z] = m.gf_pair(x, rng);
    CHECK(y == z);
    CHECK(y >= x / 2.0);
    CHECK(y < 2.5);
  }
}

TEST_CASE("admissibility class check") {
  for (const auto& r : {TrialRate::baseline(), TrialRate::large_spike(), TrialRate::high_spike()}) {
    const auto c = gf(r).check_class();
    CHECK(c.r == doctest::Approx(2.5));
    CHECK(c.L == doctest::Approx(0.9 * 2.0 * std::log(2.0)));
    // integral of x/(5-x)/x on (0, 2.5] is ln 2, below L
    CHECK(c.lower_ok);
    CHECK(c.diverges);
    CHECK(c.member());
  }
}

TEST_CASE("BAR sampling") {
  BarModel::Params p;
  p.f0 = [](double x) { return 0.5 * x + 1.0; };
  p.f1 = [](double x) { return -0.25 * x; };
  p.sigma0 = [](double) { return 0.0; };
  p.sigma1 = [](double) { return 0.0; };
  p.noise = [](Rng& rng) { return std::pair{rng.uniform() - 0.5, rng.uniform() - 0.5}; };
  const BarModel degenerate(p);
  Rng rng(3, 3);
  const auto [y, z] = degenerate.bar_pair(2.0, rng);
  CHECK(y == 2.0);
  CHECK(z == -0.5);
  CHECK_FALSE(degenerate.bar_q_density(0.0, 0.0).has_value());

  ModelConfig mc;
  mc.kind = "bar";
  mc.bar_f0 = "const:0.7";
  mc.bar_sigma0 = "const:2";
  const auto bar = make_bar_model(mc);
  const int N = 100000;
  double mean = 0.0;
  for (int i = 0; i < N; ++i) mean += bar->bar_pair(0.0, rng).first;
  mean /= N;
  CHECK(std::abs(mean - 0.7) < 3.0 * 2.0 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("BAR exchangeable children have the same law") {
  ModelConfig mc;
  mc.kind = "bar";
  mc.bar_f0 = mc.bar_f1 = "tanh:1";
  mc.bar_noise = "gaussian_corr:0.4";
  const auto bar = make_bar_model(mc);
  Rng rng(77, 0);
  std::vector<double> a, b;
  for (int i = 0; i < 10000; ++i) {
    const auto [y, z] = bar->bar_pair(0.3, rng);
    a.push_back(y);
    b.push_back(z);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Two-sample KS statistic, 0.1% critical value about 1.95 sqrt(2/n).
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / 10000.0);
  }
  CHECK(d < 1.95 * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("BAR transition density") {
  ModelConfig mc;
  mc.kind = "bar";
  mc.bar_f0 = mc.bar_f1 = "zero";
  const auto std_normal = make_bar_model(mc);
  for (double x : {-3.0, 0.0, 2.5})
    for (double y : {-1.0, 0.0, 0.7})
      CHECK(*std_normal->bar_q_density(x, y) ==
            doctest::Approx(std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi)));

  mc.bar_f0 = "linear:0.8";
  mc.bar_f1 = "linear:-0.8";
  mc.bar_sigma0 = mc.bar_sigma1 = "const:1.5";
  const auto sym = make_bar_model(mc);
  CHECK(*sym->bar_q_density(1.2, 0.9) == doctest::Approx(*sym->bar_q_density(1.2, -0.9)).epsilon(1e-14));

  mc.bar_sigma0 = "bump:0.5:1";
  mc.bar_f1 = "tanh:2";
  const auto general = make_bar_model(mc);
  for (double x : {-1.0, 0.4, 3.0}) {
    const double total =
        adaptive_simpson([&](double y) { return *general->bar_q_density(x, y); }, -30.0, 30.0, 1e-10);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto b = general->check_bounds({-2.0, -1.0, 0.0, 1.0, 2.0});
  CHECK(b.ok());
  CHECK(b.sigma_min == doctest::Approx(0.5 + std::exp(-4.0)).epsilon(1e-12));
}
