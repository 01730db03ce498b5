#include "doctest.h"

#include "pcluster/benchmarks.hpp"
#include "pcluster/error.hpp"
#include "support.hpp"

using namespace pcluster;

TEST_CASE("eigenvalue ratio examples") {
  const std::vector<double> dominant{100, 1, 0.9, 0.8};
  CHECK(eigenvalue_ratio_factors(dominant, 3) == 1);
  const std::vector<double> two{10, 9, 1, 0.5};
  CHECK(eigenvalue_ratio_factors(two, 3) == 2);
  const std::vector<double> geometric{8, 4, 2, 1};
  CHECK(eigenvalue_ratio_factors(geometric, 3) == 1);
  std::vector<double> scaled = two;
  for (double& v : scaled) v *= 1e6;
  CHECK(eigenvalue_ratio_factors(scaled, 3) == 2);
  CHECK_THROWS_AS(eigenvalue_ratio_factors(two, 4), Error);
}

TEST_CASE("TWFE on additive heterogeneity without noise is exact") {
  std::mt19937_64 rng(1);
  const MatrixXd x = testsupport::normal_matrix(8, 7, rng);
  const VectorXd a = testsupport::normal_matrix(8, 1, rng).col(0);
  const VectorXd g = testsupport::normal_matrix(7, 1, rng).col(0);
  MatrixXd y = -1.25 * x;
  y.colwise() += a;
  y.rowwise() += g.transpose();
  const auto r = estimate_twfe(PanelData(y, {x}));
  CHECK(r.beta(0) == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(r.dof == 56 - 8 - 7 + 1);
}

TEST_CASE("principal components normalization") {
  std::mt19937_64 rng(2);
  const MatrixXd w = testsupport::normal_matrix(10, 12, rng);
  const auto pc = principal_components(w, 3);
  CHECK(pc.factors.rows() == 12);
  CHECK(pc.loadings.rows() == 10);
  const MatrixXd ff = pc.factors.transpose() * pc.factors / 12.0;
  CHECK((ff - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  const MatrixXd ll = pc.loadings.transpose() * pc.loadings;
  CHECK(std::abs(ll(0, 1)) < 1e-8);
}

TEST_CASE("interactive FE") {
  std::mt19937_64 rng(3);
  const Index N = 30, T = 25;
  const MatrixXd x = testsupport::normal_matrix(N, T, rng);
  SUBCASE("no factors is pooled OLS") {
    const MatrixXd y = 2.0 * x + testsupport::normal_matrix(N, T, rng);
    const auto r = estimate_interactive_fe(PanelData(y, {x}), {.num_factors = 0});
    CHECK(r.beta(0) == doctest::Approx(x.cwiseProduct(y).sum() / x.squaredNorm()).epsilon(1e-10));
  }
  SUBCASE("exact rank-one heterogeneity is recovered") {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    VectorXd alpha(N), gamma(T);
    for (auto& v : alpha) v = u(rng);
    for (auto& v : gamma) v = u(rng);
    MatrixXd xr = x + 0.5 * alpha * gamma.transpose();
    const MatrixXd y = 1.5 * xr + alpha * gamma.transpose();
    const auto fit = fit_interactive_fe(PanelData(y, {xr}), {.num_factors = 1});
    CHECK(fit.result.beta(0) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(fit.result.converged);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] * (1 + 1e-10) + 1e-12);
  }
  SUBCASE("default factor count is floor(sqrt(T))") {
    const MatrixXd y = x + testsupport::normal_matrix(N, T, rng);
    CHECK(estimate_interactive_fe(PanelData(y, {x})).num_factors == 5);
  }
}

TEST_CASE("CCE") {
  std::mt19937_64 rng(4);
  const Index N = 15, T = 12;
  SUBCASE("noiseless linear factor model is exact") {
    const VectorXd f = testsupport::normal_matrix(T, 1, rng).col(0);
    const VectorXd lx = testsupport::normal_matrix(N, 1, rng).col(0);
    const VectorXd ly = testsupport::normal_matrix(N, 1, rng).col(0);
    const MatrixXd x = lx * f.transpose() + testsupport::normal_matrix(N, T, rng);
    const MatrixXd y = 0.8 * x + ly * f.transpose();
    const auto r = estimate_cce(PanelData(y, {x}));
    CHECK(r.beta(0) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(r.dof == N * T - N * 3);
  }
  SUBCASE("three periods with one regressor leave no residual dof") {
    const auto p = testsupport::random_panel(6, 3, 1, rng);
    try {
      estimate_cce(p);
      FAIL("expected InsufficientDof");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientDof);
    }
  }
}

TEST_CASE("factor-augmented regression on a one-factor model") {
  std::mt19937_64 rng(5);
  const Index N = 40, T = 36;
  const VectorXd f = testsupport::normal_matrix(T, 1, rng).col(0) * 3.0;
  const VectorXd lx = testsupport::normal_matrix(N, 1, rng).col(0);
  const VectorXd ly = testsupport::normal_matrix(N, 1, rng).col(0);
  const MatrixXd x = lx * f.transpose() + testsupport::normal_matrix(N, T, rng);
  const MatrixXd y = -0.6 * x + ly * f.transpose();
  const auto r = estimate_factor_augmented(PanelData(y, {x}));
  REQUIRE(r.num_factors);
  CHECK(*r.num_factors == 1);
  CHECK(std::abs(r.beta(0) + 0.6) < 0.05);
  CHECK(r.dof == N * T - N * 2);
}
