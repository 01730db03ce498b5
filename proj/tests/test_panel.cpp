#include "doctest.h"

#include "pcluster/error.hpp"
#include "pcluster/panel.hpp"
#include "support.hpp"

using namespace pcluster;

namespace {

PanelRow row(std::string unit, std::string time, double y, double x) { return {unit, time, y, {x}, 0}; }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("validate_panel builds a minimal balanced panel") {
  const auto p = validate_panel({row("b", "2", 4, 40), row("a", "1", 1, 10), row("a", "2", 2, 20), row("b", "1", 3, 30)});
  CHECK(p.num_units() == 2);
  CHECK(p.num_periods() == 2);
  CHECK(p.num_regressors() == 1);
  CHECK(p.unit_ids() == std::vector<std::string>{"a", "b"});
  CHECK(p.y()(0, 0) == 1);
  CHECK(p.y()(1, 1) == 4);
  CHECK(p.x(0)(1, 0) == 30);
}

TEST_CASE("validate_panel orders numeric labels numerically") {
  std::vector<PanelRow> rows;
  for (std::string u : {"10", "2", "1"})
    for (std::string t : {"1999", "2000"}) rows.push_back(row(u, t, 0, std::stod(u)));
  const auto p = validate_panel(rows);
  CHECK(p.unit_ids() == std::vector<std::string>{"1", "2", "10"});
  CHECK(p.x(0)(2, 0) == 10);
}

TEST_CASE("validate_panel rejects missing and duplicate cells") {
  CHECK(kind_of([] { validate_panel({row("a", "1", 1, 1), row("a", "2", 1, 1), row("b", "1", 1, 1)}); }) ==
        ErrorKind::UnbalancedPanel);
  CHECK(kind_of([] {
          validate_panel({row("a", "1", 1, 1), row("a", "1", 1, 1), row("a", "2", 1, 1), row("b", "1", 1, 1),
                          row("b", "2", 1, 1)});
        }) == ErrorKind::UnbalancedPanel);
}

TEST_CASE("PanelData rejects non-finite values and tiny panels") {
  MatrixXd y = MatrixXd::Ones(3, 3);
  MatrixXd x = MatrixXd::Ones(3, 3);
  x(1, 1) = std::nan("");
  CHECK(kind_of([&] { PanelData(y, {x}); }) == ErrorKind::NonFinite);
  CHECK_THROWS_AS(PanelData(MatrixXd::Ones(1, 3), {MatrixXd::Ones(1, 3)}), Error);
}

TEST_CASE("transposed swaps units and periods") {
  std::mt19937_64 rng(3);
  const auto p = testsupport::random_panel(4, 6, 2, rng);
  const auto q = p.transposed();
  CHECK(q.num_units() == 6);
  CHECK(q.num_periods() == 4);
  CHECK(q.y() == p.y().transpose());
  CHECK(q.x(1) == p.x(1).transpose());
  CHECK(q.unit_ids() == p.time_ids());
}

TEST_CASE("cell_means of a constant matrix are constant") {
  const MatrixXd w = MatrixXd::Constant(5, 4, 3.0);
  std::mt19937_64 rng(1);
  const auto m = cell_means(w, testsupport::random_partition(5, 2, rng), testsupport::random_partition(4, 3, rng));
  CHECK((m.by_group_period.array() == 3.0).all());
  CHECK((m.by_unit_tcluster.array() == 3.0).all());
  CHECK((m.by_group_tcluster.array() == 3.0).all());
}

TEST_CASE("cell_means hand example") {
  MatrixXd w(3, 2);
  w << 1, 2, 3, 4, 5, 6;
  const auto m = cell_means(w, Partition::from_labels({0, 0, 1}, 2), Partition::single(2));
  CHECK(m.by_group_tcluster.rows() == 2);
  CHECK(m.by_group_tcluster.cols() == 1);
  CHECK(m.by_group_tcluster(0, 0) == doctest::Approx(2.5));
  CHECK(m.by_group_tcluster(1, 0) == doctest::Approx(5.5));
  CHECK(m.by_group_period(0, 1) == doctest::Approx(3.0));
  CHECK(m.by_unit_tcluster(2, 0) == doctest::Approx(5.5));
}

TEST_CASE("Partition::check rejects empty clusters and bad labels") {
  CHECK_THROWS_AS(Partition::from_labels({0, 0, 2}, 3), Error);
  CHECK_THROWS_AS(Partition::from_labels({0, -1}, 1), Error);
  CHECK(Partition::single(4).cluster_sizes() == std::vector<Index>{4});
  CHECK(Partition::singletons(3).num_clusters == 3);
}

TEST_CASE("fold layouts") {
  SUBCASE("4 x 4") {
    const auto f = build_fold_layout(4, 4);
    CHECK(f.folds[0].units.begin == 0);
    CHECK(f.folds[0].units.end == 2);
    CHECK(f.folds[0].periods.end == 2);
    CHECK(f.folds[3].units.begin == 2);
    CHECK(f.folds[3].periods.begin == 2);
    CHECK(f.folds[3].periods.end == 4);
  }
  SUBCASE("5 x 5 puts the extra unit in the second half") {
    const auto f = build_fold_layout(5, 5);
    CHECK(f.folds[0].units.size() == 2);
    CHECK(f.folds[2].units.begin == 2);
    CHECK(f.folds[2].units.size() == 3);
    CHECK(f.folds[1].periods.size() == 3);
  }
  SUBCASE("50 x 50") {
    const auto f = build_fold_layout(50, 50);
    for (const auto& fold : f.folds) {
      CHECK(fold.units.size() == 25);
      CHECK(fold.periods.size() == 25);
    }
  }
  SUBCASE("source folds share units or periods") {
    const auto f = build_fold_layout(7, 9);
    for (int d = 0; d < 4; ++d) {
      const auto& fold = f.folds[static_cast<std::size_t>(d)];
      const auto& us = f.folds[static_cast<std::size_t>(FoldLayout::unit_source[static_cast<std::size_t>(d)])];
      const auto& ps = f.folds[static_cast<std::size_t>(FoldLayout::period_source[static_cast<std::size_t>(d)])];
      CHECK(us.units.begin == fold.units.begin);
      CHECK(us.periods.begin != fold.periods.begin);
      CHECK(ps.periods.begin == fold.periods.begin);
      CHECK(ps.units.begin != fold.units.begin);
    }
    for (Index i = 0; i < 7; ++i)
      for (Index t = 0; t < 9; ++t) {
        const auto& fold = f.folds[static_cast<std::size_t>(f.fold_of(i, t))];
        CHECK((fold.units.contains(i) && fold.periods.contains(t)));
      }
  }
  CHECK(kind_of([] { build_fold_layout(3, 10); }) == ErrorKind::PanelTooSmall);
}
