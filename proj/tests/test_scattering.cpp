#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "latcont/helmholtz.hpp"
#include "latcont/scattering.hpp"

using namespace latcont;
using Catch::Approx;

namespace {

VectorXd direction(double theta) {
  VectorXd w(2);
  w << std::cos(theta), std::sin(theta);
  return w;
}

double bessel_j0(double x) {
  if (x == 0.0) return 1.0;
  return hankel0_out(cdouble{x, 0.0}).real();
}

// 2 pi int_0^R J0(|q| r) V(r) r dr by Simpson's rule; the radial reduction of
// the plane Fourier integral for a rotation-invariant potential.
cdouble radial_fourier_oracle(const PotentialSpec& v, double qnorm, int panels) {
  const double r = v.support_radius;
  const double step = r / (2 * panels);
  VectorXd x(2);
  auto integrand = [&](double s) {
    if (s == 0.0) return 0.0;
    x << s, 0.0;
    return bessel_j0(qnorm * s) * v(x) * s;
  };
  double acc = integrand(0.0) + integrand(r);
  for (int i = 1; i < 2 * panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(step * i);
  return cdouble{2.0 * pi * acc * step / 3.0, 0.0};
}

}  // namespace

TEST_CASE("surface parametrization stays on the energy surface") {
  std::mt19937_64 rng(2026081301ull);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  std::uniform_real_distribution<double> energy(0.1, 3.0);
  const double hs[] = {0.2, 0.1, 0.05};
  double worst_surface = 0.0;
  double worst_limit = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double h = hs[trial % 3];
    const double e = energy(rng);
    const SurfacePoint p = square_surface_point(e, h, direction(angle(rng)));
    worst_surface = std::max(worst_surface, std::abs(square_ph(h, p.xi) - e) / std::max(1.0, e));
    const double drift = (p.xi - std::sqrt(e) * p.omega).norm();
    worst_limit = std::max(worst_limit, drift / (h * h * std::pow(e, 1.5)));
  }
  CHECK(worst_surface <= 1e-12);
  CHECK(worst_limit <= 0.2);

  VectorXd up(2);
  up << 0.0, 1.0;
  const SurfacePoint axis = square_surface_point(1.0, 0.1, up);
  CHECK(axis.xi[0] == 0.0);

  CHECK_THROWS_AS(square_surface_point(0.0, 0.1, direction(0.3)), WindowError);
  CHECK_THROWS_AS(square_surface_point(400.0, 0.1, direction(0.3)), WindowError);
  CHECK_THROWS_AS(square_surface_point(1.0, 0.1, VectorXd::Zero(2)), ConfigError);
}

TEST_CASE("surface trace takes its exact value on a point source and is linear") {
  const double h = 0.2;
  GridFunction delta = GridFunction::zeros(h, Box{2, 10}, 1);
  delta.values[0][delta.box.flatten(std::vector<int>{0, 0})] = 1.0;

  const std::vector<VectorXd> omegas = unit_circle_grid(8);
  const std::vector<cdouble> tr = trace_operator(1.0, h, delta, omegas);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const SurfacePoint p = square_surface_point(1.0, h, omegas[i]);
    const cdouble want = (h / (2.0 * pi)) / std::sqrt(p.grad_norm);
    CHECK(std::abs(tr[i] - want) <= 1e-14);
  }

  GridFunction g = sample(h, delta.box, 1, [&](const VectorXd& x, VectorXcd& v) {
    v[0] = cdouble{std::exp(-x.squaredNorm()), 0.3 * x[0]};
  });
  GridFunction mix = g;
  mix *= cdouble{0.7, -0.4};
  mix += delta;
  const std::vector<cdouble> ta = trace_operator(1.0, h, mix, omegas);
  const std::vector<cdouble> tg = trace_operator(1.0, h, g, omegas);
  for (std::size_t i = 0; i < omegas.size(); ++i)
    CHECK(std::abs(ta[i] - (cdouble{0.7, -0.4} * tg[i] + tr[i])) <= 1e-14);

  CHECK_THROWS_AS(trace_operator(1.0, h, GridFunction::zeros(h, Box{2, 4}, 2), omegas),
                  ConfigError);
}

TEST_CASE("surface trace satisfies the shell Parseval identity") {
  // data whose transform is a gaussian shell in energy: the squared l2 mass
  // must equal the energy integral of the squared trace over the surfaces.
  // The shell must be wide enough in momentum that the field decays inside
  // the box, and its tails must die before the quadrature interval ends.
  const double h = 0.5;
  const double e_lo = 0.26, e_hi = 5.74;
  auto shell = [&](double e) { return std::exp(-std::pow((e - 3.0) / 0.85, 2)); };

  TorusFunction spec = TorusFunction::zeros(h, Box{2, 69}, 1);
  for_each_index(spec.box, [&](std::size_t idx, const std::vector<int>& k) {
    spec.values[0][idx] = shell(square_ph(h, spec.node(k)));
  });
  const GridFunction f = idft(spec);

  double mass = 0.0;
  for (const cdouble& v : f.values[0]) mass += std::norm(v);

  // midpoint in energy, trapezoid in angle; the line element of the surface
  // parametrization is |d xi / d theta|
  const int ne = 24, ntheta = 128;
  const double de = (e_hi - e_lo) / ne;
  double shellmass = 0.0;
  for (int a = 0; a < ne; ++a) {
    const double e = e_lo + de * (a + 0.5);
    std::vector<VectorXd> omegas;
    omegas.reserve(ntheta);
    for (int b = 0; b < ntheta; ++b) omegas.push_back(direction(2.0 * pi * b / ntheta));
    const std::vector<cdouble> tr = trace_operator(e, h, f, omegas);
    double ring = 0.0;
    for (int b = 0; b < ntheta; ++b) {
      const double theta = 2.0 * pi * b / ntheta;
      const double se = std::sqrt(e);
      VectorXd dxi(2);
      dxi << se * (-std::sin(theta)) /
                 std::sqrt(1.0 - std::pow(0.5 * h * se * std::cos(theta), 2)),
          se * std::cos(theta) / std::sqrt(1.0 - std::pow(0.5 * h * se * std::sin(theta), 2));
      ring += std::norm(tr[static_cast<std::size_t>(b)]) * dxi.norm();
    }
    shellmass += ring * (2.0 * pi / ntheta) * de;
  }
  CHECK(std::abs(shellmass - mass) <= 1e-9 * mass);
}

TEST_CASE("lattice born term is reciprocal and tracks the potential transform") {
  const PotentialSpec v = make_potential("bump:radius=1,height=0.5");
  const std::vector<VectorXd> omegas = unit_circle_grid(6);
  const AmplitudeGrid g = discrete_amplitude_grid_at(1.0, 0.2, v, omegas, cdouble{1.0, 1.0});
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(g.born(i, j) - std::conj(g.born(j, i))) <= 1e-12);

  // Riemann-sum consistency of the Born integrand at fixed momentum transfer
  VectorXd q(2);
  q << 1.3, -0.4;
  const cdouble integral = detail::potential_fourier_integral(v, q, 1024);
  std::vector<double> hs = {0.4, 0.2, 0.1};
  std::vector<double> errs;
  for (double h : hs) {
    const int half = static_cast<int>(std::ceil(v.support_radius / h));
    KahanSumC acc;
    VectorXd x(2);
    for (int n1 = -half; n1 <= half; ++n1)
      for (int n2 = -half; n2 <= half; ++n2) {
        x << h * n1, h * n2;
        const double vv = v(x);
        if (vv != 0.0) acc.add(vv * std::exp(-iu * (q[0] * x[0] + q[1] * x[1])));
      }
    errs.push_back(std::abs(h * h * acc.value() - integral));
  }
  CHECK(strictly_decreasing(errs));
  const double c = errs[0] / hs[0];
  for (std::size_t i = 1; i < hs.size(); ++i) CHECK(errs[i] <= 1.05 * c * hs[i]);
}

TEST_CASE("zero potential gives a vanishing amplitude on every route") {
  const PotentialSpec none = make_potential("none");
  const std::vector<VectorXd> omegas = unit_circle_grid(4);
  const AmplitudeGrid g = discrete_amplitude_grid(1.0, 0.2, none, omegas);
  CHECK(g.born.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.full.cwiseAbs().maxCoeff() == 0.0);
  const AmplitudeGrid c = continuum_amplitude_grid(1.0, none, omegas, 0.02, 128);
  CHECK(c.born.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.full.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weak-coupling correction is quadratic and matches a second born term") {
  const double h = 0.2;
  const cdouble z{1.0, 0.5};
  const std::vector<VectorXd> omegas = {direction(0.0), direction(2.0)};

  auto correction = [&](double height) {
    const PotentialSpec v =
        make_potential("bump:radius=1,height=" + std::to_string(height));
    const AmplitudeGrid g = discrete_amplitude_grid_at(1.0, h, v, omegas, z);
    return Eigen::MatrixXcd(g.born - g.full);
  };
  const Eigen::MatrixXcd c2 = correction(0.2);
  const Eigen::MatrixXcd c1 = correction(0.1);
  const double ratio = c2.cwiseAbs().maxCoeff() / c1.cwiseAbs().maxCoeff();
  CHECK(ratio >= 3.3);
  CHECK(ratio <= 4.8);

  // second Born term built directly from the lattice kernel, no linear solve
  const PotentialSpec unit = make_potential("bump:radius=1");
  const int half = static_cast<int>(std::ceil(unit.support_radius / h));
  const Box sbox{2, half};
  SquareLatticeKernel ker(h, z, 2 * half);
  std::vector<std::array<int, 2>> nodes(sbox.total());
  VectorXd vv(static_cast<Eigen::Index>(sbox.total()));
  VectorXd x(2);
  for_each_index(sbox, [&](std::size_t idx, const std::vector<int>& n) {
    nodes[idx] = {n[0], n[1]};
    x << h * n[0], h * n[1];
    vv[static_cast<Eigen::Index>(idx)] = unit(x);
  });
  const SurfacePoint out = square_surface_point(1.0, h, omegas[0]);
  const SurfacePoint in = square_surface_point(1.0, h, omegas[1]);
  KahanSumC acc;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (vv[static_cast<Eigen::Index>(i)] == 0.0) continue;
    KahanSumC row;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (vv[static_cast<Eigen::Index>(j)] == 0.0) continue;
      row.add(ker.at(nodes[i][0] - nodes[j][0], nodes[i][1] - nodes[j][1]) *
              vv[static_cast<Eigen::Index>(j)] *
              std::exp(iu * (h * (nodes[j][0] * in.xi[0] + nodes[j][1] * in.xi[1]))));
    }
    acc.add(vv[static_cast<Eigen::Index>(i)] *
            std::exp(-iu * (h * (nodes[i][0] * out.xi[0] + nodes[i][1] * out.xi[1]))) *
            row.value());
  }
  const cdouble second_born = std::pow(h / (2.0 * pi), 2) * acc.value() /
                              std::sqrt(out.grad_norm * in.grad_norm);

  auto defect = [&](double t) { return std::abs(correction(t)(0, 1) - t * t * second_born); };
  const double d2 = defect(0.2);
  const double d1 = defect(0.1);
  CHECK(d2 / d1 >= 6.0);
  CHECK(d2 / d1 <= 10.0);
}

TEST_CASE("fixed-parameter amplitude agrees with a torus-route contraction") {
  const double h = 0.2;
  const cdouble z{1.0, 2.0};
  const PotentialSpec v = make_potential("bump:radius=1,height=0.3");
  const std::vector<VectorXd> omegas = {direction(0.0), direction(1.1), direction(2.7),
                                        direction(4.4)};
  const AmplitudeGrid g = discrete_amplitude_grid_at(1.0, h, v, omegas, z);

  const ScalingRegime r = make_regime("square");
  const int half = 64;
  std::vector<SurfacePoint> pts;
  for (const VectorXd& w : omegas) pts.push_back(square_surface_point(1.0, h, w));
  Eigen::MatrixXcd other(4, 4);
  for (int j = 0; j < 4; ++j) {
    const GridFunction psi =
        sample(h, Box{2, half}, 1, [&](const VectorXd& x, VectorXcd& out) {
          out[0] = v(x) * std::exp(iu * pts[static_cast<std::size_t>(j)].xi.dot(x));
        });
    const SolveResult sol = potential_solve(r, EnergyQuery::complex_energy(z), v, psi);
    for (int i = 0; i < 4; ++i) {
      KahanSumC acc;
      for_each_index(sol.u.box, [&](std::size_t idx, const std::vector<int>& n) {
        VectorXd x(2);
        x << h * n[0], h * n[1];
        const double vvv = v(x);
        if (vvv != 0.0)
          acc.add(vvv * std::exp(-iu * pts[static_cast<std::size_t>(i)].xi.dot(x)) *
                  sol.u.values[0][idx]);
      });
      other(i, j) = g.born(i, j) -
                    std::pow(h / (2.0 * pi), 2) * acc.value() /
                        std::sqrt(pts[static_cast<std::size_t>(i)].grad_norm *
                                  pts[static_cast<std::size_t>(j)].grad_norm);
    }
  }
  const double scale = g.full.cwiseAbs().maxCoeff();
  CHECK((g.full - other).cwiseAbs().maxCoeff() <= 1e-4 * scale);
}

TEST_CASE("amplitude ladder extrapolates to a stable boundary value") {
  const PotentialSpec v = make_potential("bump:radius=1,height=0.3");
  const std::vector<VectorXd> omegas = unit_circle_grid(4);
  const AmplitudeGrid a6 = discrete_amplitude_grid(1.0, 0.2, v, omegas);
  const AmplitudeGrid a7 =
      discrete_amplitude_grid(1.0, 0.2, v, omegas, lap_epsilons(1.0, 7));
  const double drift = (a6.full - a7.full).cwiseAbs().maxCoeff();
  CHECK(drift <= 4.0 * a6.diagnostics.at("ladder_err_max") + 1e-12);
  CHECK(a6.diagnostics.at("rcond_min") > 1e-9);
}

TEST_CASE("continuum born integral matches a radial quadrature oracle") {
  const PotentialSpec v = make_potential("gaussian:sigma=0.5,height=0.8");
  for (double qn : {0.0, 0.45, 1.1, 2.0}) {
    VectorXd q(2);
    q << qn * std::cos(0.7), qn * std::sin(0.7);
    const cdouble plane = detail::potential_fourier_integral(v, q, 1024);
    const cdouble radial = radial_fourier_oracle(v, qn, 20000);
    CHECK(std::abs(plane - radial) <= 1e-8 * (1.0 + std::abs(radial)));
  }

  // forward direction: the born term reduces to C(E) int V
  const Amplitude fwd =
      continuum_amplitude(1.0, direction(0.4), direction(0.4), v, 0.02, 1024);
  const cdouble want = continuum_amplitude_constant(1.0) * radial_fourier_oracle(v, 0.0, 20000);
  CHECK(std::abs(fwd.born - want) <= 1e-8 * std::abs(want));
}

TEST_CASE("continuum correction is quadratic in the coupling strength") {
  const VectorXd out = direction(0.3);
  const VectorXd in = direction(2.1);
  auto corr = [&](double height) {
    const PotentialSpec v =
        make_potential("bump:radius=1.5,height=" + std::to_string(height));
    const Amplitude a = continuum_amplitude(1.0, out, in, v, 0.02, 512);
    return std::abs(a.born - a.full);
  };
  const double c2 = corr(0.3);
  const double c1 = corr(0.15);
  CHECK(c2 / c1 >= 3.5);
  CHECK(c2 / c1 <= 4.5);
}

TEST_CASE("lattice amplitudes drift toward the continuum kernel under refinement") {
  const PotentialSpec v = make_potential("bump:radius=1,height=0.4");
  const AmplitudeConvergence table =
      amplitude_convergence_table(1.0, v, {0.4, 0.2}, 4, 0.01);
  CHECK(table.decreasing);
  CHECK(strictly_decreasing(table.born_gap));
  CHECK(table.born_fit_order >= 1.0);
}

TEST_CASE("scattering guards reject degenerate requests") {
  const PotentialSpec v = make_potential("bump:radius=1,height=0.3");
  CHECK_THROWS_AS(unit_circle_grid(0), ConfigError);
  CHECK_THROWS_AS(discrete_amplitude_grid(1.0, 0.2, v, {}), ConfigError);
  CHECK_THROWS_AS(
      discrete_amplitude_grid_at(1.0, 0.2, v, unit_circle_grid(2), cdouble{1.0, 0.0}),
      ConfigError);
  CHECK_THROWS_AS(continuum_amplitude_constant(-1.0), WindowError);
  CHECK_THROWS_AS(amplitude_convergence_table(1.0, v, {0.1, 0.2}, 4), ConfigError);
  CHECK_THROWS_AS(amplitude_convergence_table(1.0, v, {0.2}, 4), ConfigError);
}
