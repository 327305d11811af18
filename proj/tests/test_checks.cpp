#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "latcont/checks.hpp"

using namespace latcont;
using Catch::Approx;

namespace {

GridFunction gaussian_data(double h, int halfwidth, double sigma, const VectorXd& center,
                           double wave = 0.0) {
  return sample(h, Box{2, halfwidth}, 1, [&](const VectorXd& x, VectorXcd& v) {
    const double g = std::exp(-(x - center).squaredNorm() / (2.0 * sigma * sigma));
    v[0] = g * std::exp(iu * (wave * x.sum()));
  });
}

}  // namespace

TEST_CASE("dyadic summation bounds hold on random sequences") {
  std::mt19937_64 rng(913370001ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> b(static_cast<std::size_t>(len(rng)));
    const int style = trial % 4;
    double growth = 1.0;
    for (double& v : b) {
      switch (style) {
        case 0: v = unit(rng); break;
        case 1: v = unit(rng) < 0.3 ? 0.0 : std::exp(6.0 * unit(rng)); break;
        case 2: v = growth * unit(rng); growth *= 2.0; break;
        default: v = std::pow(unit(rng), 8); break;
      }
    }
    const AlphaBetaResult r = alpha_beta_check(b);
    CHECK(r.holds);
  }

  const AlphaBetaResult spike = alpha_beta_check({1.0, 0.0, 0.0});
  CHECK(spike.alpha == 1.0);
  CHECK(spike.beta == 1.0);
  std::vector<double> doubling(20);
  for (std::size_t i = 0; i < doubling.size(); ++i) doubling[i] = std::pow(2.0, double(i));
  const AlphaBetaResult geo = alpha_beta_check(doubling);
  CHECK(geo.alpha == Approx(1.0));
  CHECK(geo.beta <= 2.0);
  CHECK_THROWS_AS(alpha_beta_check({}), ConfigError);
  CHECK_THROWS_AS(alpha_beta_check({1.0, -0.5}), ConfigError);
}

TEST_CASE("dyadic and continuous ball averages are two-equivalent") {
  std::mt19937_64 rng(913370002ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> halfs(3, 24);
  for (int trial = 0; trial < 1000; ++trial) {
    const double h = 0.05 + 0.45 * unit(rng);
    const int dim = trial % 5 == 0 ? 1 : 2;
    GridFunction g = GridFunction::zeros(h, Box{dim, halfs(rng)}, 1);
    const int style = trial % 3;
    for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
      double r2 = 0.0;
      for (int j = 0; j < dim; ++j) r2 += sq(h * n[j]);
      switch (style) {
        case 0: g.values[0][idx] = cdouble{unit(rng) - 0.5, unit(rng) - 0.5}; break;
        case 1: g.values[0][idx] = unit(rng) < 0.8 ? cdouble{} : cdouble{unit(rng), 0.0}; break;
        default: g.values[0][idx] = std::pow(1.0 + r2, -0.25); break;
      }
    });
    const DyadicSupResult r = dyadic_sup_check(g);
    CHECK(r.holds);
  }
}

TEST_CASE("riemann sums of a narrow gaussian follow the linear error law") {
  const double sigma = 0.05;
  auto f = [&](const VectorXd& x) {
    return std::exp(-x.squaredNorm() / (2.0 * sigma * sigma)) / (2.0 * pi * sigma * sigma);
  };
  const RiemannSumResult r = riemann_sum_check(f, 2, 2.0, {0.2, 0.1, 0.05, 0.025});
  CHECK(std::abs(r.reference - 1.0) <= 1e-10);  // normalized mass
  CHECK(strictly_decreasing(r.errors));
  CHECK(r.fitted_order >= 1.0);
  CHECK(r.within_linear_law);

  SECTION("odd integrands cancel on both routes") {
    auto odd = [](const VectorXd& x) { return x[0] * std::exp(-x.squaredNorm()); };
    const RiemannSumResult ro = riemann_sum_check(odd, 2, 6.0, {0.2, 0.1});
    CHECK(std::abs(ro.reference) <= 1e-14);
    for (double sum : ro.lattice_sums) CHECK(std::abs(sum) <= 1e-14);
  }

  SECTION("degenerate sweeps are rejected") {
    auto one = [](const VectorXd&) { return 1.0; };
    CHECK_THROWS_AS(riemann_sum_check(one, 2, 1.0, {0.1}), ConfigError);
    CHECK_THROWS_AS(riemann_sum_check(one, 2, 1.0, {0.1, 0.2}), ConfigError);
    CHECK_THROWS_AS(riemann_sum_check(one, 3, 1.0, {0.2, 0.1}), ConfigError);
  }
}

TEST_CASE("slab estimates against the dyadic norms hold on sampled fields") {
  VectorXd origin = VectorXd::Zero(2);
  VectorXd off(2);
  off << 3.5, -2.0;
  const GridFunction shapes[] = {
      gaussian_data(0.1, 128, 1.0, origin),
      gaussian_data(0.1, 128, 0.4, off, 2.5),
      gaussian_data(0.2, 64, 2.5, origin, 1.0),
      sample(0.1, Box{2, 128}, 1,
             [](const VectorXd& x, VectorXcd& v) {
               v[0] = std::pow(1.0 + x.squaredNorm(), -0.5);
             }),
  };
  for (const GridFunction& g : shapes) {
    const SlabCheckResult r = slab_inequality_check(g);
    CHECK(r.integral_holds);
    CHECK(r.sup_holds);
    CHECK(r.besov > 0.0);
    CHECK(r.besov_star > 0.0);
  }
}

TEST_CASE("difference-weight commutators are controlled by the stronger weight") {
  std::mt19937_64 rng(913370003ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double h : {0.4, 0.2, 0.1}) {
    GridFunction u = GridFunction::zeros(h, Box{2, static_cast<int>(std::lround(6.4 / h))}, 1);
    for (auto& v : u.values[0]) v = cdouble{unit(rng), unit(rng)};
    const CommutatorCheckResult r = commutator_check(u, 1.0);
    CHECK(r.ratio > 0.0);
    CHECK(r.ratio <= 8.0);
  }

  GridFunction zero = GridFunction::zeros(0.2, Box{2, 8}, 1);
  const CommutatorCheckResult rz = commutator_check(zero, 1.0);
  CHECK(rz.ratio == 0.0);
  CHECK_THROWS_AS(commutator_check(zero, -0.5), ConfigError);
}

TEST_CASE("the resolvent a priori inequality is stable across the mesh sweep") {
  const cdouble z{1.0, 0.2};
  std::vector<double> ratios;
  for (double h : {0.2, 0.1, 0.05}) {
    const int halfwidth = static_cast<int>(std::lround(12.8 / h));
    const GridFunction f = gaussian_data(h, halfwidth, 1.0, VectorXd::Zero(2));
    const AprioriCheckResult r = apriori_inequality_check(h, z, f, 1.0);
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs > 0.0);
    ratios.push_back(r.ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi <= 2.0 * *lo);

  SECTION("zero data gives zero on both sides") {
    const GridFunction f0 = GridFunction::zeros(0.2, Box{2, 16}, 1);
    const AprioriCheckResult r0 = apriori_inequality_check(0.2, z, f0, 1.0);
    CHECK(r0.lhs == 0.0);
    CHECK(r0.rhs == 0.0);
    CHECK(r0.ratio == 0.0);
  }
}
