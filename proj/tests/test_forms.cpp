#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "sg/ktheory.hpp"

using namespace sg;

namespace {

Mat scalar(cplx z) { return Mat::Constant(1, 1, z); }

// Degree of a map T^2 -> S^2 from the signed solid angles of a triangulated
// grid (Van Oosterom-Strackee), independent of any differential form code.
double degree_by_solid_angle(int N, const std::function<Eigen::Vector3d(double, double)>& n) {
  auto unit = [&](int i, int j) {
    Eigen::Vector3d v = n(static_cast<double>(i) / N, static_cast<double>(j) / N);
    return Eigen::Vector3d(v / v.norm());
  };
  auto tri = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
  };
  double omega = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      auto a = unit(i, j), b = unit(i + 1, j), c = unit(i + 1, j + 1), d = unit(i, j + 1);
      omega += tri(a, b, c) + tri(a, c, d);
    }
  return omega / (4 * kPi);
}

// Winding number of a scalar loop by phase unwrapping.
double unwrap_winding(const std::vector<cplx>& z) {
  double w = 0;
  for (size_t j = 0; j < z.size(); ++j) w += std::arg(z[(j + 1) % z.size()] / z[j]);
  return w / kTwoPi;
}

}  // namespace

TEST_CASE("spectral derivative of a trigonometric polynomial is exact") {
  auto f = GridFunction::sample({16, 16}, 1, [](const std::vector<double>& x) {
    return scalar(std::sin(kTwoPi * 3 * x[0]) * std::cos(kTwoPi * 2 * x[1]));
  });
  auto dx = spectral_derivative(f, 0), dy = spectral_derivative(f, 1);
  double ex = 0, ey = 0;
  for (size_t p = 0; p < f.points(); ++p) {
    auto x = f.coords(p);
    ex = std::max(ex, std::abs(dx.at(p)(0, 0) - kTwoPi * 3 * std::cos(kTwoPi * 3 * x[0]) * std::cos(kTwoPi * 2 * x[1])));
    ey = std::max(ey, std::abs(dy.at(p)(0, 0) + kTwoPi * 2 * std::sin(kTwoPi * 3 * x[0]) * std::sin(kTwoPi * 2 * x[1])));
  }
  CHECK(ex < 1e-11);
  CHECK(ey < 1e-11);
}

TEST_CASE("exterior calculus on the grid") {
  auto H = random_trig_hermitian(2, 2, 2, 0.7, 3);
  auto U = GridFunction::sample({16, 16}, 2, [&](const std::vector<double>& x) { return H(x); });
  auto w = DifferentialForm::zero_form(U);
  CHECK(d_exterior(d_exterior(w)).sup_norm() < 1e-9);

  auto c = GridFunction::sample({16, 16}, 1, [](const std::vector<double>& x) { return scalar(1.0 + std::cos(kTwoPi * x[0])); });
  DifferentialForm a({16, 16}, 1), b({16, 16}, 1);
  a.add({0, 1}, c);
  b.add({1, 0}, c);
  CHECK(std::abs(integrate(a) - cplx(1.0)) < 1e-14);
  CHECK(std::abs(integrate(b) + cplx(1.0)) < 1e-14);

  DifferentialForm fx({16, 16}, 1), gy({16, 16}, 1);
  fx.add({0}, c);
  gy.add({1}, c);
  CHECK((wedge(fx, gy) + wedge(gy, fx)).sup_norm() < 1e-15);
}

TEST_CASE("binary container round trip") {
  auto H = random_trig_hermitian(2, 1, 1, 1.0, 9);
  auto f = GridFunction::sample({32}, 2, [&](const std::vector<double>& x) { return expi_hermitian(H(x)); });
  std::stringstream ss;
  write_grid(ss, f);
  auto g = read_grid(ss);
  CHECK(g.dims() == f.dims());
  CHECK((g - f).sup_norm() == 0.0);

  auto w = chern_odd(f);
  std::stringstream s2;
  write_form(s2, w);
  auto v = read_form(s2);
  CHECK((v - w).sup_norm() == 0.0);
}

TEST_CASE("cut-off integrals equal the Beta function B(k,k)") {
  const std::array<double, 5> frozen = {1.0, 1.0 / 6, 1.0 / 30, 1.0 / 140, 1.0 / 630};
  for (double eps : {0.02, 0.05}) {
    auto prof = make_bump_profile(512, eps);
    for (int k = 1; k <= 5; ++k) {
      CHECK(std::abs(lemma_id_integral(prof, k) - std::beta(k, k)) < 1e-10);
      CHECK(std::abs(lemma_id_closed_form(k) - frozen[k - 1]) < 1e-15);
    }
  }
}

TEST_CASE("bump profile invariants") {
  const double eps = 0.02;
  auto prof = make_bump_profile(256, eps);
  for (int j = 0; j < prof.n_theta; ++j) {
    const double t = prof.theta[j], f = prof.f[j];
    CHECK(prof.g[j] * prof.h[j] == 0.0);
    CHECK(std::abs(prof.g[j] * prof.g[j] + prof.h[j] * prof.h[j] - (f - f * f)) < 1e-14);
    if (t <= eps || t >= 1 - eps) CHECK(f == 1.0);
    if (std::abs(t - 0.5) <= eps) CHECK(f == 0.0);
  }
  CHECK_THROWS_AS(make_bump_profile(32, 0.02), Error);
}

TEST_CASE("cup product is a projection with fibre trace n") {
  auto prof = make_bump_profile(64, 0.05);
  auto H = random_trig_hermitian(3, 1, 2, 1.0, 4);
  auto U = GridFunction::sample({16}, 3, [&](const std::vector<double>& x) { return expi_hermitian(H(x)); }, false);
  auto e = cup_with_bott(U, prof);
  CHECK(projection_defect(e) < 1e-12);
  auto tr = trace(e);
  for (size_t p = 0; p < tr.points(); ++p) CHECK(std::abs(tr.at(p)(0, 0) - 3.0) < 1e-12);
  auto bad = GridFunction::constant({16}, Mat::Identity(3, 3) * 2.0);
  CHECK_THROWS_AS(cup_with_bott(bad, prof), Error);
}

TEST_CASE("odd character integrates to the winding number") {
  for (int w : {-2, 1, 3}) {
    auto U = GridFunction::sample({64}, 1, [&](const std::vector<double>& x) {
      return scalar(std::exp(cplx(0.0, kTwoPi * w * x[0] + 0.4 * std::sin(kTwoPi * x[0]))));
    });
    std::vector<cplx> z;
    for (size_t p = 0; p < U.points(); ++p) z.push_back(U.at(p)(0, 0));
    const double oracle = unwrap_winding(z);
    CHECK(std::abs(oracle - w) < 1e-12);
    CHECK(std::abs(integrate(chern_odd(U)).real() - oracle) < 1e-12);
  }
}

TEST_CASE("even character of a degree-one projection on T^2") {
  // p = (1 + n.sigma)/2 with n a degree-one map to the sphere
  auto nvec = [](double x, double y) {
    return Eigen::Vector3d(std::sin(kTwoPi * x), std::sin(kTwoPi * y), 1.0 + std::cos(kTwoPi * x) + std::cos(kTwoPi * y));
  };
  auto p = GridFunction::sample({64, 64}, 2, [&](const std::vector<double>& x) {
    Eigen::Vector3d v = nvec(x[0], x[1]).normalized();
    Mat P(2, 2);
    P << 1.0 + v[2], cplx(v[0], -v[1]), cplx(v[0], v[1]), 1.0 - v[2];
    return Mat(0.5 * P);
  }, false);
  const double deg = degree_by_solid_angle(256, nvec);
  CHECK(std::abs(std::abs(deg) - 1.0) < 1e-9);
  // Ch_2 = -(1/4 pi) n.(dn x dn) integrates to -deg
  CHECK(std::abs(integrate(chern_even(p)).real() + deg) < 1e-8);
}

TEST_CASE("transgression integrates to the difference of characters") {
  auto T0 = random_trig_hermitian(2, 2, 1, 0.4, 11), T1 = random_trig_hermitian(2, 2, 1, 0.4, 12);
  UnitaryPath path;
  const int Ns = 65;
  for (int j = 0; j < Ns; ++j) {
    const double s = static_cast<double>(j) / (Ns - 1);
    path.nodes.push_back(GridFunction::sample(
        {32, 32}, 2, [&](const std::vector<double>& x) { return expi_hermitian(T0(x) + s * T1(x)); }, false));
  }
  CHECK(path.unitarity_defect() < 1e-12);
  auto t = tch(secondary_chern_odd(path));
  auto diff = chern_odd(path.nodes.back()) - chern_odd(path.nodes.front());
  CHECK((d_exterior(t) - diff).sup_norm() < 1e-7);
}

TEST_CASE("coarse paths are rejected") {
  UnitaryPath path;
  for (int j = 0; j < 5; ++j) {
    const double s = j / 4.0;
    path.nodes.push_back(GridFunction::sample({8}, 1, [&](const std::vector<double>& x) {
      return scalar(std::exp(cplx(0.0, 40.0 * s * s * s + std::cos(kTwoPi * x[0]))));
    }));
  }
  CHECK_THROWS_AS(secondary_chern_odd(path), Error);
}
