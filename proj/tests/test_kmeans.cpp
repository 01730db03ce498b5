#include "doctest.h"

#include "pcluster/kmeans.hpp"
#include "support.hpp"

using namespace pcluster;

namespace {

MatrixXd four_points() {
  MatrixXd p(4, 2);
  p << 0, 0, 0, 1, 10, 0, 10, 1;
  return p;
}

}  // namespace

TEST_CASE("four-point instance has objective 1") {
  const auto r = kmeans_multistart(four_points(), 2, 5, Seed(7));
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(testsupport::same_partition(r.partition.labels, {0, 0, 1, 1}));
  const auto e = testsupport::exhaustive_kmeans(four_points(), 2);
  CHECK(e.objective == doctest::Approx(1.0));
}

TEST_CASE("G = 1 gives the total sum of squares") {
  std::mt19937_64 rng(2);
  const MatrixXd p = testsupport::normal_matrix(13, 3, rng);
  const auto r = kmeans_multistart(p, 1, 3, Seed(1));
  const double tss = (p.rowwise() - p.colwise().mean()).squaredNorm();
  CHECK(r.objective == doctest::Approx(tss).epsilon(1e-12));
  CHECK(r.partition.num_clusters == 1);
}

TEST_CASE("G = n gives singletons and zero objective") {
  std::mt19937_64 rng(4);
  const MatrixXd p = testsupport::normal_matrix(6, 2, rng);
  const auto r = kmeans_multistart(p, 6, 3, Seed(1));
  CHECK(r.objective == 0.0);
  CHECK(r.partition.cluster_sizes() == std::vector<Index>(6, 1));
}

TEST_CASE("one start equals a single Lloyd run from the first seeding") {
  std::mt19937_64 rng(5);
  const MatrixXd p = testsupport::normal_matrix(20, 2, rng);
  const Seed seed(99);
  auto engine = seed.child(0).engine();
  const auto single = kmeans_single(p, 3, kmeanspp_labels(p, 3, engine));
  const auto multi = kmeans_multistart(p, 3, 1, seed);
  CHECK(multi.partition.labels == single.partition.labels);
  CHECK(multi.objective == single.objective);
}

TEST_CASE("eight Gaussian points reach the enumerated optimum") {
  std::mt19937_64 rng(11);
  const MatrixXd p = testsupport::normal_matrix(8, 2, rng);
  const auto e = testsupport::exhaustive_kmeans(p, 3);
  const auto r = kmeans_multistart(p, 3, 30, Seed(3));
  CHECK(r.objective == doctest::Approx(e.objective).epsilon(1e-12));
  CHECK(testsupport::same_partition(r.partition.labels, e.labels));
}

TEST_CASE("same seed gives identical results") {
  std::mt19937_64 rng(12);
  const MatrixXd p = testsupport::normal_matrix(40, 3, rng);
  const auto a = kmeans_multistart(p, 4, 10, Seed(8));
  const auto b = kmeans_multistart(p, 4, 10, Seed(8));
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.objective == b.objective);
  CHECK(a.start_index == b.start_index);
}

TEST_CASE("every cluster stays non-empty with duplicate points") {
  MatrixXd p = MatrixXd::Zero(6, 1);
  p(5, 0) = 1.0;
  const auto r = kmeans_multistart(p, 3, 4, Seed(2));
  r.partition.check();
  CHECK(r.partition.num_clusters == 3);
  CHECK(r.objective == 0.0);
}

TEST_CASE("kmeans_objective matches a direct computation") {
  MatrixXd p(3, 1);
  p << 0, 2, 5;
  CHECK(kmeans_objective(p, {0, 0, 1}, 2) == doctest::Approx(2.0));
}

TEST_CASE("a converged assignment is a fixed point") {
  std::mt19937_64 rng(21);
  const MatrixXd p = testsupport::normal_matrix(30, 2, rng);
  const auto first = kmeans_multistart(p, 4, 5, Seed(1));
  const auto again = kmeans_single(p, 4, first.partition.labels);
  CHECK(again.partition.labels == first.partition.labels);
  CHECK(again.objective == doctest::Approx(first.objective).epsilon(1e-14));
}
