#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "sg/spectral.hpp"

using namespace sg;

namespace {

RVec sorted_spectrum(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(H), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Positive roots of w cos w + a sin w = 0 (a > 0), one in each ((n - 1/2) pi, n pi).
std::vector<double> robin_roots(double a, int count) {
  std::vector<double> out;
  auto g = [a](double w) { return w * std::cos(w) + a * std::sin(w); };
  for (int n = 1; n <= count; ++n) {
    double lo = (n - 0.5) * kPi, hi = n * kPi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) * g(lo) <= 0 ? hi : lo) = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

}  // namespace

TEST_CASE("P_partial is the positive spectral projection when A is invertible") {
  auto model = random_model(4, 1, 21);
  // (1 + A |A|^{-1})/2 with |A| = sqrt(A^2) from the matrix function library
  const Mat absA = (model.A * model.A).sqrt();
  const Mat oracle = 0.5 * (Mat::Identity(4, 4) + model.A * absA.inverse());
  CHECK(max_abs(boundary_projection_Ppartial(model) - oracle) < 1e-12);
}

TEST_CASE("kernel handling needs a Lagrangian subspace") {
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = 1.3;
  auto model = make_model(B, 4, 1);
  CHECK_THROWS_AS(boundary_projection_Ppartial(model), Error);
  auto [Kp, Km] = chiral_kernel(model);
  REQUIRE(Kp.cols() == 1);
  CHECK(max_abs(model.A * Kp) < 1e-14);
  CHECK(max_abs(model.A * Km) < 1e-14);
  model.L = lagrangian_graph(model, Mat::Constant(1, 1, std::exp(cplx(0, 0.3))));
  const Mat L = *model.L;
  CHECK(max_abs(L.adjoint() * L - Mat::Identity(1, 1)) < 1e-14);
  // Lagrangian: gamma L is orthogonal to L
  CHECK(max_abs(L.adjoint() * model.gamma * L) < 1e-14);
  const Mat P = boundary_projection_Ppartial(model);
  CHECK(max_abs(P * P - P) < 1e-12);
  CHECK(std::abs(P.trace() - cplx(2.0)) < 1e-12);
}

TEST_CASE("boundary projection path") {
  auto model = random_model(4, 1, 5);
  const Mat u = random_block_unitary(model, 1.0, 6);
  const Mat Pd = boundary_projection_Ppartial(model);
  const Mat I = Mat::Identity(4, 4);
  for (double t : {0.0, 0.3, kPi / 4, 1.2, kPi / 2}) {
    const Mat P = build_Pt(model, u, t).P;
    CHECK(max_abs(P * P - P) < 1e-13);
    CHECK(max_abs(P - P.adjoint()) < 1e-14);
    CHECK(std::abs(P.trace() - cplx(4.0)) < 1e-12);
  }
  const Mat P0 = build_Pt(model, u, 0).P;
  CHECK(max_abs(P0.topLeftCorner(4, 4) - Pd) < 1e-14);
  CHECK(max_abs(P0.bottomRightCorner(4, 4) - (I - u.adjoint() * Pd * u)) < 1e-14);
  CHECK(max_abs(P0.topRightCorner(4, 4)) < 1e-14);
  const Mat Ph = build_Pt(model, u, kPi / 2).P;
  CHECK(max_abs(Ph.topLeftCorner(4, 4) - (I - Pd)) < 1e-14);
  CHECK_THROWS_AS(build_Pt(model, Mat::Identity(4, 4) * 2.0, 0.1), Error);
  Mat mix = Mat::Identity(4, 4);
  mix.block(0, 0, 4, 4) = expi_hermitian(random_hermitian(4, 1.0, 3));
  CHECK_THROWS_AS(build_Pt(model, mix, 0.1), Error);
}

TEST_CASE("circle Dirac operator: block structure and spectrum") {
  auto model = random_model(4, 1, 8);
  const int K = 5;
  auto op = build_circle_dirac(model, K, 1);
  Mat diagk = Mat::Zero(2 * K + 1, 2 * K + 1);
  for (int k = -K; k <= K; ++k) diagk(k + K, k + K) = -kTwoPi * k;
  const Mat oracle = Eigen::kroneckerProduct(diagk, model.gamma).eval() +
                     Eigen::kroneckerProduct(Mat::Identity(2 * K + 1, 2 * K + 1), Mat(kI * model.gamma * model.A)).eval();
  CHECK(max_abs(op.H - oracle) < 1e-14);

  // (i gamma A)^2 = A^2 and it anticommutes with gamma: blocks have eigenvalues +-sqrt((2 pi k)^2 + a^2)
  RVec a = sorted_spectrum(model.A).cwiseAbs();
  std::vector<double> expect;
  for (int k = -K; k <= K; ++k)
    for (Eigen::Index i = 0; i < a.size(); ++i) expect.push_back(std::hypot(kTwoPi * k, a[i]));
  // spec(A) = {+-a}; block k has +-hypot(2 pi k, a)
  std::vector<double> got;
  RVec ev = sorted_spectrum(op.H);
  for (Eigen::Index i = 0; i < ev.size(); ++i) got.push_back(std::abs(ev[i]));
  std::sort(got.begin(), got.end());
  std::sort(expect.begin(), expect.end());
  REQUIRE(got.size() == expect.size());
  double err = 0;
  for (size_t i = 0; i < got.size(); ++i) err = std::max(err, std::abs(got[i] - expect[i]));
  CHECK(err < 1e-11);
  CHECK(std::abs(ev.sum()) < 1e-10);

  auto free_op = build_circle_dirac(make_model(Mat::Zero(1, 1), 2, 1), 3, 1);
  RVec fe = sorted_spectrum(free_op.H);
  for (int k = -3; k <= 3; ++k)
    CHECK(std::count_if(fe.begin(), fe.end(), [&](double x) { return std::abs(x - kTwoPi * k) < 1e-12; }) == 2);
}

TEST_CASE("circle derivative and shifted circle") {
  auto d = build_circle_derivative(4, 2, -1);
  for (int k = -4; k <= 4; ++k) CHECK(d.H((k + 4) * 2 + 1, (k + 4) * 2 + 1).real() == doctest::Approx(kTwoPi * k));
  CHECK_THROWS_AS(build_circle_derivative(4, 2, 0), Error);
  auto s = build_shifted_circle(0.3, 10);
  REQUIRE(s.diagonal);
  CHECK(s.diag.minCoeff() == doctest::Approx(kTwoPi * (-10 + 0.3)));
  CHECK(s.diag.maxCoeff() == doctest::Approx(kTwoPi * 10.3));
  CHECK(s.cutoff < kTwoPi * 9.7);
}

TEST_CASE("Toeplitz compression") {
  auto D = build_circle_derivative(6, 2, 1);
  auto full = compress(D, [](double) { return Mat(Mat::Identity(2, 2)); });
  CHECK(max_abs(Mat(sorted_spectrum(full.H).asDiagonal()) - Mat(sorted_spectrum(D.H).asDiagonal())) < 1e-10);
  // constant rank-one projection: one fiber component survives
  auto half = compress(D, [](double) {
    Mat p = Mat::Zero(2, 2);
    p(0, 0) = 1;
    return p;
  });
  REQUIRE(half.H.rows() == 13);
  RVec ev = sorted_spectrum(half.H);
  for (int k = -6; k <= 6; ++k) CHECK(ev[k + 6] == doctest::Approx(kTwoPi * k).epsilon(1e-10));
  // a projection with a sharp jump cannot be resolved on few samples
  auto jump = [](double th) {
    Mat p = Mat::Zero(2, 2);
    p(0, 0) = th < 0.5 ? 1.0 : 0.0;
    p(1, 1) = 1.0 - p(0, 0);
    return p;
  };
  CompressOptions tight;
  tight.interior = 1.0;
  CHECK_THROWS_AS(compress(D, jump, tight), Error);
}

TEST_CASE("compressed circle has rank n per mode") {
  auto model = random_model(2, 1, 2);
  const Mat u = random_block_unitary(model, 0.8, 3);
  auto op = build_compressed_circle(model, u, 0.05, 24);
  // e_u has fibre trace equal to the model dimension; with 2K+1 modes the rank is close to (2K+1)*2
  const int rank = op.provenance["compressed"]["rank"].get<int>();
  CHECK(std::abs(rank - 49 * 2) <= 4);
}

TEST_CASE("interval operator with spectral boundary condition: transcendental oracle") {
  // B = [[a]], u = 1, P_0: eigenvalues +-sqrt(w^2 + a^2) with w cos w + a sin w = 0
  const double a = 0.7;
  Mat B = Mat::Constant(1, 1, a);
  auto model = make_model(B, 2, 1);
  const Mat u = Mat::Identity(2, 2);
  auto prof = make_bump_profile(256, 0.05);
  auto bc = build_Pt(model, u, 0.0);
  const auto roots = robin_roots(a, 4);
  std::vector<double> errs;
  for (int K : {32, 96}) {
    auto op = build_interval_dirac(model, u, prof, 0.0, bc, K);
    RVec ev = sorted_spectrum(op.H);
    std::vector<double> pos;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > 0) pos.push_back(ev[i]);
    std::vector<double> neg;
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
      if (ev[i] < 0) neg.push_back(-ev[i]);
    double e = 0;
    for (int n = 0; n < 4; ++n) {
      const double lam = std::hypot(roots[n], a);
      e = std::max({e, std::abs(pos[n] - lam), std::abs(neg[n] - lam)});
    }
    errs.push_back(e);
  }
  CHECK(errs[0] < 2e-2);
  CHECK(errs[1] < errs[0]);
  CHECK(errs[1] < 5e-3);
}

TEST_CASE("interval operator at t = 0 is conjugate to the untwisted one") {
  auto model = random_model(4, 1, 31);
  const Mat u = random_block_unitary(model, 1.0, 32);
  auto prof = make_bump_profile(256, 0.05);
  const int K = 16;
  auto op = build_interval_dirac(model, u, prof, 0.0, build_Pt(model, u, 0.0), K);
  // u (i gamma (d/dx + u* A u)) u* = i gamma (d/dx + A); the boundary condition moves to diag(u Pd u*, I - Pd)
  const Mat Pd = boundary_projection_Ppartial(model);
  BoundaryProjection bc;
  bc.P = Mat::Zero(8, 8);
  bc.P.topLeftCorner(4, 4) = u * Pd * u.adjoint();
  bc.P.bottomRightCorner(4, 4) = Mat::Identity(4, 4) - Pd;
  auto ref = build_interval_dirac(model, Mat::Identity(4, 4), prof, 0.0, bc, K);
  RVec a = sorted_spectrum(op.H), b = sorted_spectrum(ref.H);
  REQUIRE(a.size() == b.size());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("interval operator: commuting unitary leaves the spectrum unchanged along t") {
  auto model = random_model(2, 1, 40);
  // u = exp(i s A^2) commutes with A and with gamma
  const Mat u = expi_hermitian(0.7 * model.A * model.A);
  auto prof = make_bump_profile(256, 0.05);
  const int K = 16;
  RVec e0 = sorted_spectrum(build_interval_dirac(model, u, prof, 0.0, build_Pt(model, u, 0.0), K).H);
  RVec e1 = sorted_spectrum(build_interval_dirac(model, u, prof, 0.8, build_Pt(model, u, 0.0), K).H);
  CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reference basis rejects bad boundary conditions") {
  Mat P = Mat::Identity(4, 4);
  CHECK_THROWS_AS(interval_basis(P, 4), Error);
  Mat Q = Mat::Zero(4, 4);
  Q(0, 0) = 1;
  Q(1, 1) = 1;  // kills b+(0) and b-(0): not a graph over incoming data
  CHECK_THROWS_AS(interval_basis(Q, 4), Error);
}

TEST_CASE("conjugation identity and symmetries") {
  auto model = random_model(2, 1, 50);
  auto c = conjugation_check(model, Mat::Identity(2, 2), 0.05, 128);
  CHECK(c.residual < 1e-9);
  const Mat u = random_block_unitary(model, 1.0, 51);
  auto r = mu_symmetry_check(model, u, {0.0, 0.4, kPi / 4, 1.1});
  CHECK(r.worst() < 1e-12);
}

TEST_CASE("torus model: collocated multiplication is unitary and block diagonal") {
  auto model = torus2_boundary_model(2, 2);
  model.validate();
  auto u = torus2_unitary(2, 2, [](double x, double y) {
    Mat U(2, 2);
    const double c = std::cos(kTwoPi * x), s = std::sin(kTwoPi * x);
    U << c, -std::exp(cplx(0, -kTwoPi * y)) * s, std::exp(cplx(0, kTwoPi * y)) * s, c;
    return U;
  });
  check_block_unitary(model, u);
  CHECK(u.rows() == model.dim());
  // scalar e^{2 pi i x} acts as a cyclic shift of the first Fourier index
  auto shift = torus2_unitary(1, 1, [](double x, double) { return Mat::Constant(1, 1, std::exp(cplx(0, kTwoPi * x))); });
  const Mat S = shift.topLeftCorner(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(S(((i + 1) % 3) * 3 + j, i * 3 + j) - cplx(1.0)) < 1e-12);
}
