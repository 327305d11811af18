#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "latcont/fourier.hpp"

using namespace latcont;
using Catch::Approx;

namespace {

GridFunction random_grid(double h, Box box, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GridFunction g = GridFunction::zeros(h, box, channels);
  for (auto& ch : g.values)
    for (auto& v : ch) v = cdouble(gauss(rng), gauss(rng));
  return g;
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0;
  for (int c = 0; c < a.channels; ++c)
    for (std::size_t i = 0; i < a.values[c].size(); ++i)
      m = std::max(m, std::abs(a.values[c][i] - b.values[c][i]));
  return m;
}

}  // namespace

TEST_CASE("transform round trip is exact") {
  for (int d : {1, 2}) {
    Box box{d, d == 1 ? 15 : 7};
    GridFunction g = random_grid(0.3, box, 2, 7 + d);
    GridFunction back = idft(dft(g));
    CHECK(max_diff(g, back) < 1e-12);
  }
}

TEST_CASE("grid Parseval identity") {
  Box box{2, 9};
  GridFunction g = random_grid(0.25, box, 3, 99);
  const double lhs = norm_l2(g);
  const double rhs = std::pow(g.h, g.box.dim / 2.0) * torus_l2(dft(g));
  CHECK(lhs == Approx(rhs).epsilon(1e-12));
}

TEST_CASE("direct evaluation agrees with the fast transform on canonical nodes") {
  Box box{2, 5};
  GridFunction g = random_grid(0.4, box, 1, 3);
  TorusFunction t = dft(g);
  std::vector<VectorXd> nodes;
  std::vector<std::size_t> flat;
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& k) {
    if (idx % 7 != 0) return;
    nodes.push_back(t.node(k));
    flat.push_back(idx);
  });
  auto vals = dft_at(g, nodes);
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK(std::abs(vals[i][0] - t.values[0][flat[i]]) < 1e-12);
}

TEST_CASE("lattice shift becomes a modulation") {
  Box box{1, 20};
  const double h = 0.5;
  GridFunction u = GridFunction::zeros(h, box, 1);
  GridFunction v = GridFunction::zeros(h, box, 1);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  const int m = 3;
  // v supported away from the edges so the wrapped shift acts as a true shift
  for (int n = -box.halfwidth + m; n <= box.halfwidth - m; ++n)
    v.values[0][box.flatten({n})] = cdouble(gauss(rng), gauss(rng));
  for (int n = -box.halfwidth + m; n <= box.halfwidth - m; ++n)
    u.values[0][box.flatten({n + m})] = v.values[0][box.flatten({n})];
  TorusFunction uh = dft(u);
  TorusFunction vh = dft(v);
  double worst = 0;
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& k) {
    const VectorXd xi = uh.node(k);
    const cdouble expect = std::exp(-iu * (h * m * xi[0])) * vh.values[0][idx];
    worst = std::max(worst, std::abs(uh.values[0][idx] - expect));
  });
  CHECK(worst < 1e-12);
}

TEST_CASE("sinc kernel values") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1.0) == 0.0);
  CHECK(sinc(-4.0) == 0.0);
  CHECK(sinc(0.5) == Approx(2.0 / pi).epsilon(1e-15));
  CHECK(sinc(1.5) == Approx(-2.0 / (3.0 * pi)).epsilon(1e-14));
}

TEST_CASE("cardinal interpolation reproduces samples") {
  Box box{2, 6};
  GridFunction g = random_grid(0.35, box, 2, 23);
  std::vector<VectorXd> pts;
  std::vector<std::size_t> idxs;
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& n) {
    if (idx % 11 != 0) return;
    pts.push_back(g.point(n));
    idxs.push_back(idx);
  });
  auto vals = cardinal_interpolate(g, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(vals[i][c] - g.values[c][idxs[i]]) < 1e-12);
}

TEST_CASE("spectral resampling matches the sinc interpolant on resolved data") {
  // two samples per unit width keeps the spectral tail below ~3e-9
  const double h = 0.5;
  Box box{1, 16};
  GridFunction g = sample_scalar(h, box, [](const VectorXd& x) {
    return cdouble(std::exp(-0.5 * x.squaredNorm()) * std::cos(0.5 * x[0]), 0.0);
  });
  const int refine = 3;
  GridFunction fine = resample(g, refine);
  CHECK(fine.h == Approx(h / refine));
  CHECK(fine.box.halfwidth == refine * box.halfwidth);

  std::vector<VectorXd> pts;
  std::vector<std::size_t> idxs;
  for_each_index(fine.box, [&](std::size_t idx, const std::vector<int>& n) {
    if (std::abs(n[0]) > 30 || idx % 5 != 0) return;
    pts.push_back(fine.point(n));
    idxs.push_back(idx);
  });
  REQUIRE(pts.size() > 5);
  auto direct = cardinal_interpolate(g, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(direct[i][0] - fine.values[0][idxs[i]]) < 1e-6);

  // original samples are reproduced exactly at coincident nodes
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& n) {
    const std::size_t fi = fine.box.flatten({refine * n[0]});
    CHECK(std::abs(fine.values[0][fi] - g.values[0][idx]) < 1e-10);
  });
}

TEST_CASE("weighted norms on localized data") {
  const double h = 0.5;
  Box box{2, 12};
  GridFunction g = GridFunction::zeros(h, box, 1);
  // single spike at hn = (3, 0), radius 3: shell index 2
  g.values[0][box.flatten({6, 0})] = 2.0;
  CHECK(norm_l2(g) == Approx(2.0 * h).epsilon(1e-14));
  CHECK(norm_weighted_l2(g, 0.5) ==
        Approx(2.0 * h * std::sqrt(std::sqrt(10.0))).epsilon(1e-13));
  CHECK(norm_besov(g) == Approx(2.0 * 2.0 * h).epsilon(1e-13));
  // sup over R>1 of (1/R) sum_{|hn|<=R} h^d |u|^2 is attained at R = 3
  CHECK(sq(norm_besov_star(g)) == Approx(h * h * 4.0 / 3.0).epsilon(1e-13));

  GridFunction o = GridFunction::zeros(h, box, 1);
  o.values[0][box.flatten({1, 0})] = 1.0;  // radius 1/2 <= 1: clamp R to 1
  CHECK(sq(norm_besov_star(o)) == Approx(h * h).epsilon(1e-13));
}

TEST_CASE("Sobolev norm reduces to weighted norm and scales plane waves") {
  Box box{2, 8};
  GridFunction g = random_grid(0.3, box, 1, 41);
  CHECK(norm_sobolev_hms(g, 0, -0.75) ==
        Approx(norm_weighted_l2(g, -0.75)).epsilon(1e-11));

  // canonical-node plane wave is an exact multiplier eigenvector
  TorusFunction probe = TorusFunction::zeros(0.3, box, 1);
  std::vector<int> k{3, -5};
  const VectorXd xi = probe.node(k);
  GridFunction w = sample_scalar(0.3, box, [&](const VectorXd& x) {
    return std::exp(iu * (x[0] * xi[0] + x[1] * xi[1]));
  });
  const double expect = (1.0 + xi.squaredNorm()) * norm_l2(w);
  CHECK(norm_sobolev_hms(w, 2, 0.0) == Approx(expect).epsilon(1e-10));
}

TEST_CASE("slab profile picks out transverse mass") {
  const double h = 0.5;
  Box box{2, 4};
  GridFunction g = GridFunction::zeros(h, box, 1);
  g.values[0][box.flatten({2, -1})] = 3.0;
  g.values[0][box.flatten({2, 3})] = 4.0;
  auto rows = slab_profile(g);
  REQUIRE(rows.size() == static_cast<std::size_t>(box.points_per_axis()));
  for (int n1 = -4; n1 <= 4; ++n1) {
    const double expect = n1 == 2 ? std::sqrt(h * (9.0 + 16.0)) : 0.0;
    CHECK(rows[n1 + 4] == Approx(expect).margin(1e-14));
  }
}

TEST_CASE("gauge phase is unitary and invertible") {
  Box box{2, 7};
  GridFunction g = random_grid(0.4, box, 2, 55);
  VectorXd d1(2);
  d1 << 2 * pi / 3, -2 * pi / 3;
  GridFunction ph = gauge_phase(g, d1, +1);
  CHECK(norm_l2(ph) == Approx(norm_l2(g)).epsilon(1e-13));
  GridFunction back = gauge_phase(ph, d1, -1);
  CHECK(max_diff(g, back) < 1e-13);
}

TEST_CASE("grid serialization round trip is lossless and deterministic") {
  Box box{2, 5};
  GridFunction g = random_grid(0.2, box, 2, 77);
  const std::string base = "test_grid_io_tmp";
  save_grid(g, base);
  GridFunction r = load_grid(base);
  CHECK(r.h == g.h);
  CHECK(r.box.dim == g.box.dim);
  CHECK(r.box.halfwidth == g.box.halfwidth);
  CHECK(r.channels == g.channels);
  CHECK(max_diff(g, r) == 0.0);

  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const std::string bin1 = slurp(base + ".bin"), json1 = slurp(base + ".json");
  save_grid(g, base);
  CHECK(slurp(base + ".bin") == bin1);
  CHECK(slurp(base + ".json") == json1);
  std::remove((base + ".bin").c_str());
  std::remove((base + ".json").c_str());
}

TEST_CASE("norm dispatch covers every kind") {
  Box box{2, 6};
  GridFunction g = random_grid(0.3, box, 1, 88);
  CHECK(weighted_norm(g, NormSpec::l2()) == Approx(norm_l2(g)));
  CHECK(weighted_norm(g, NormSpec::weighted(1.5)) == Approx(norm_weighted_l2(g, 1.5)));
  CHECK(weighted_norm(g, NormSpec::besov()) == Approx(norm_besov(g)));
  CHECK(weighted_norm(g, NormSpec::besov_star()) == Approx(norm_besov_star(g)));
  CHECK(weighted_norm(g, NormSpec::sobolev(1, -0.5)) ==
        Approx(norm_sobolev_hms(g, 1, -0.5)));
}
