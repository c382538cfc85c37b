#include <doctest.h>

#include <cmath>

#include "sg/spectral.hpp"

using namespace sg;

namespace {

// sum_k sign(k + b) exp(-e |k + b|), summed in closed form
double exp_regularized_eta(double b, double e) {
  return (std::exp(-e * b) - std::exp(-e * (1 - b))) / (1 - std::exp(-e));
}

SpectrumData from_values(std::vector<double> v, double cutoff, double eps_ker = 1e-10) {
  std::sort(v.begin(), v.end());
  SpectrumData s;
  s.values = Eigen::Map<RVec>(v.data(), v.size());
  s.cutoff = cutoff;
  s.eps_ker = eps_ker;
  for (double x : v) s.kernel_dim += std::abs(x) < eps_ker;
  return s;
}

std::vector<double> shifted(double b, int K, double scale = 1.0) {
  std::vector<double> v;
  for (int k = -K; k <= K; ++k) v.push_back(scale * kTwoPi * (k + b));
  return v;
}

int count_negative(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < 0).count());
}

SpectrumFn diagonal_family(std::function<double(int, double)> lam, int lo, int hi) {
  return [=](double s) {
    std::vector<double> v;
    for (int j = lo; j <= hi; ++j) v.push_back(lam(j, s));
    std::sort(v.begin(), v.end());
    return RVec(Eigen::Map<RVec>(v.data(), v.size()));
  };
}

}  // namespace

TEST_CASE("eta of the shifted circle operator") {
  for (double b : {0.1, 0.25, 0.4, 0.75, 0.9}) {
    // the exponential regularization tends to the same limit
    CHECK(std::abs(exp_regularized_eta(b, 1e-6) - (1 - 2 * b)) < 1e-5);
    auto e = eta(eigenvalues(build_shifted_circle(b, 2000)));
    REQUIRE(e.converged);
    CHECK(std::abs(e.value - (1 - 2 * b)) < 1e-8);
    CHECK(e.error < 1e-6);
    CHECK(e.xi == doctest::Approx(0.5 * e.value));
  }
}

TEST_CASE("eta: symmetric spectra, kernels, finite perturbations") {
  auto sym = eta(from_values(shifted(0.5, 400), kTwoPi * 398));
  CHECK(std::abs(sym.value) < 1e-10);

  auto zero = eta(from_values(shifted(0.0, 400), kTwoPi * 398));
  CHECK(zero.kernel_dim == 1);
  CHECK(std::abs(zero.value) < 1e-10);
  CHECK(zero.xi == doctest::Approx(0.5));

  // direct sum of two shifted operators: eta is additive
  auto v = shifted(0.2, 400), w = shifted(0.35, 400);
  v.insert(v.end(), w.begin(), w.end());
  auto sum = eta(from_values(v, kTwoPi * 398));
  CHECK(std::abs(sum.value - (0.6 + 0.3)) < 1e-8);

  // two extra eigenvalues shift eta by 2 but leave an O(sqrt t) term the
  // extrapolation cannot remove; the error bar has to cover the miss
  auto x = shifted(0.3, 400);
  x.push_back(1.0);
  x.push_back(2.5);
  auto extra = eta(from_values(x, kTwoPi * 398));
  CHECK(std::abs(extra.value - 2.4) <= extra.error);
  CHECK(extra.error > 1e-3);
}

TEST_CASE("eta is scale invariant and odd under a sign flip") {
  const double b = 0.2;
  auto base = eta(from_values(shifted(b, 600), kTwoPi * 598));
  auto scaled = eta(from_values(shifted(b, 600, 3.7), 3.7 * kTwoPi * 598));
  auto flipped = eta(from_values(shifted(b, 600, -1.0), kTwoPi * 598));
  CHECK(std::abs(scaled.value - base.value) < 1e-9);
  CHECK(std::abs(flipped.value + base.value) < 1e-9);
}

TEST_CASE("eta with too few eigenvalues is not converged") {
  auto e = eta(from_values({-1.0, 0.5, 2.0, 3.0, 4.0}, 10.0));
  CHECK_FALSE(e.converged);
  CHECK(std::isinf(e.error));
}

TEST_CASE("spectral flow of diagonal families") {
  auto f = diagonal_family([](int j, double s) { return j + 0.5 - 3 * s; }, -5, 5);
  CHECK(spectral_flow(f, 0, 1).sf == -3);
  CHECK(spectral_flow(f, 1, 0).sf == 3);
  auto r = spectral_flow(f, 0, 1);
  REQUIRE(r.crossings.size() == 3);
  CHECK(r.crossings[0].param == doctest::Approx(1.0 / 6).epsilon(1e-6));

  // zero counts as nonnegative: the branch starting at 0 leaves, the one ending at 0 does not arrive
  auto g = diagonal_family([](int j, double s) { return j - 3.0 * s; }, -5, 5);
  CHECK(spectral_flow(g, 0, 1).sf == -3);
  CHECK(spectral_flow(g, 1, 0).sf == 3);
}

TEST_CASE("avoided crossing carries no flow") {
  auto f = [](double s) {
    Mat H = Mat::Zero(3, 3);
    H(0, 0) = s - 0.5;
    H(1, 1) = 0.5 - s;
    H(0, 1) = H(1, 0) = 1e-3;
    H(2, 2) = 4.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    return RVec(es.eigenvalues());
  };
  CHECK(spectral_flow(f, 0, 1).sf == 0);
}

TEST_CASE("monotone family: flow equals the change in negative count") {
  for (uint64_t seed : {1, 2, 3}) {
    const Mat H0 = random_hermitian(12, 3.0, seed);
    Mat G = random_hermitian(12, 1.0, seed + 100);
    const Mat H1 = G * G + 0.5 * Mat::Identity(12, 12);  // positive definite
    auto fn = spectrum_fn([&](double s) {
      DiscreteOperator op;
      op.H = H0 + 4.0 * s * H1;
      return op;
    });
    const int oracle = count_negative(H0) - count_negative(H0 + 4.0 * H1);
    CHECK(spectral_flow(fn, 0, 1).sf == oracle);
  }
}

TEST_CASE("shifted circle family passes one eigenvalue through zero") {
  auto fn = spectrum_fn([](double b) { return build_shifted_circle(b, 20); });
  CHECK(spectral_flow(fn, 0.25, 1.25).sf == 1);
  CHECK(spectral_flow(fn, 1.25, 0.25).sf == -1);
}

TEST_CASE("spectral flow around a square") {
  auto spec = [](double t, double s) {
    std::vector<double> v;
    for (int j = -6; j <= 6; ++j) v.push_back(j + 0.5 - 3 * t - 2 * s);
    std::sort(v.begin(), v.end());
    return RVec(Eigen::Map<RVec>(v.data(), v.size()));
  };
  auto r = sf_square(spec, 0, 1, 0, 1);
  CHECK(r.bottom == -2);
  CHECK(r.top == -2);
  CHECK(r.left == -3);
  CHECK(r.right == -3);
  CHECK(r.loop() == 0);

  const Mat H0 = random_hermitian(10, 2.0, 7), H1 = random_hermitian(10, 2.0, 8), H2 = random_hermitian(10, 2.0, 9);
  auto gen = [&](double t, double s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(H0 + 2 * t * H1 + 2 * s * H2), Eigen::EigenvaluesOnly);
    return RVec(es.eigenvalues());
  };
  CHECK(sf_square(gen, 0, 1, 0, 1).loop() == 0);
}

TEST_CASE("xi difference bookkeeping") {
  EtaEstimate a, b;
  a.converged = b.converged = true;
  a.xi = 0.2;
  b.xi = 1.45;
  a.error = b.error = 1e-6;
  auto r = xi_difference_identity(a, b, 1, 0.25);
  CHECK(r.lhs == doctest::Approx(0.25));
  CHECK(r.residual < 1e-14);
  auto w = xi_difference_identity(a, b, 2, 0.25);
  CHECK(w.residual == doctest::Approx(1.0));
  CHECK(w.mod1 < 1e-14);
  b.converged = false;
  CHECK_THROWS_AS(xi_difference_identity(a, b, 0, 0), Error);
  CHECK(dist_to_int(2.9) == doctest::Approx(0.1));
  CHECK(dist_to_int(-0.2) == doctest::Approx(0.2));
}
