#include "pcluster/panel.hpp"

#include "pcluster/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

namespace pcluster {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::PanelTooSmall: return "PanelTooSmall";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::InsufficientDof: return "InsufficientDof";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::TooFewUnits: return "TooFewUnits";
  }
  return "Unknown";
}

namespace {

std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen(ids.begin(), ids.end());
  if (seen.size() != ids.size())
    throw Error(ErrorKind::InvalidInput, std::string(what) + " labels are not unique");
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

// Numeric order when every label is a number, lexicographic otherwise.
std::vector<std::string> ordered_labels(const std::set<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  bool numeric = std::all_of(out.begin(), out.end(),
                             [](const std::string& s) { return parse_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  }
  return out;
}

}  // namespace

PanelData::PanelData(MatrixXd y, std::vector<MatrixXd> x, std::vector<std::string> unit_ids,
                     std::vector<std::string> time_ids)
    : y_(std::move(y)), x_(std::move(x)), unit_ids_(std::move(unit_ids)), time_ids_(std::move(time_ids)) {
  if (y_.rows() < 2 || y_.cols() < 2)
    throw Error(ErrorKind::InvalidInput, "panel needs N >= 2 and T >= 2");
  if (x_.empty()) throw Error(ErrorKind::InvalidInput, "panel needs at least one regressor");
  for (const auto& xk : x_) {
    if (xk.rows() != y_.rows() || xk.cols() != y_.cols())
      throw Error(ErrorKind::InvalidInput, "regressor shape differs from outcome shape");
    if (!xk.allFinite()) throw Error(ErrorKind::NonFinite, "regressor contains NaN or Inf");
  }
  if (!y_.allFinite()) throw Error(ErrorKind::NonFinite, "outcome contains NaN or Inf");
  if (unit_ids_.empty()) unit_ids_ = default_labels(y_.rows());
  if (time_ids_.empty()) time_ids_ = default_labels(y_.cols());
  if (static_cast<Index>(unit_ids_.size()) != y_.rows() ||
      static_cast<Index>(time_ids_.size()) != y_.cols())
    throw Error(ErrorKind::InvalidInput, "label count does not match panel dimensions");
  require_unique(unit_ids_, "unit");
  require_unique(time_ids_, "time");
}

PanelData PanelData::transposed() const {
  std::vector<MatrixXd> xt;
  xt.reserve(x_.size());
  for (const auto& xk : x_) xt.emplace_back(xk.transpose());
  return PanelData(y_.transpose(), std::move(xt), time_ids_, unit_ids_);
}

PanelData validate_panel(const std::vector<PanelRow>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidInput, "no observations");
  const std::size_t K = rows.front().x.size();
  std::set<std::string> units, times;
  for (const auto& r : rows) {
    if (r.x.size() != K)
      throw Error(ErrorKind::InvalidInput,
                  "line " + std::to_string(r.line) + ": inconsistent number of regressors");
    if (!std::isfinite(r.y) ||
        !std::all_of(r.x.begin(), r.x.end(), [](double v) { return std::isfinite(v); }))
      throw Error(ErrorKind::NonFinite, "line " + std::to_string(r.line) + ": non-finite value");
    units.insert(r.unit);
    times.insert(r.time);
  }
  auto unit_ids = ordered_labels(units);
  auto time_ids = ordered_labels(times);
  std::map<std::string, Index> unit_pos, time_pos;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) unit_pos[unit_ids[i]] = static_cast<Index>(i);
  for (std::size_t t = 0; t < time_ids.size(); ++t) time_pos[time_ids[t]] = static_cast<Index>(t);

  const Index N = static_cast<Index>(unit_ids.size());
  const Index T = static_cast<Index>(time_ids.size());
  MatrixXd y(N, T);
  std::vector<MatrixXd> x(K, MatrixXd(N, T));
  std::vector<char> filled(static_cast<std::size_t>(N * T), 0);
  for (const auto& r : rows) {
    Index i = unit_pos[r.unit];
    Index t = time_pos[r.time];
    auto& f = filled[static_cast<std::size_t>(i * T + t)];
    if (f)
      throw Error(ErrorKind::UnbalancedPanel, "line " + std::to_string(r.line) +
                                                  ": duplicate cell (" + r.unit + ", " + r.time + ")");
    f = 1;
    y(i, t) = r.y;
    for (std::size_t k = 0; k < K; ++k) x[k](i, t) = r.x[k];
  }
  if (rows.size() != filled.size()) {
    for (Index i = 0; i < N; ++i)
      for (Index t = 0; t < T; ++t)
        if (!filled[static_cast<std::size_t>(i * T + t)])
          throw Error(ErrorKind::UnbalancedPanel, "missing cell (" + unit_ids[static_cast<std::size_t>(i)] +
                                                      ", " + time_ids[static_cast<std::size_t>(t)] + ")");
  }
  return PanelData(std::move(y), std::move(x), std::move(unit_ids), std::move(time_ids));
}

std::vector<Index> Partition::cluster_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(num_clusters), 0);
  for (int g : labels) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

void Partition::check() const {
  if (num_clusters < 1) throw Error(ErrorKind::InvalidInput, "partition needs at least one cluster");
  std::vector<char> used(static_cast<std::size_t>(num_clusters), 0);
  for (int g : labels) {
    if (g < 0 || g >= num_clusters) throw Error(ErrorKind::InvalidInput, "cluster label out of range");
    used[static_cast<std::size_t>(g)] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw Error(ErrorKind::InvalidInput, "partition has an empty cluster");
}

Partition Partition::single(std::size_t n) { return from_labels(std::vector<int>(n, 0), 1); }

Partition Partition::singletons(std::size_t n) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
  return from_labels(std::move(labels), static_cast<int>(n));
}

Partition Partition::from_labels(std::vector<int> labels, int num_clusters) {
  Partition p{std::move(labels), num_clusters, {}};
  p.check();
  return p;
}

CellMeans cell_means(const MatrixXd& w, const Partition& units, const Partition& periods) {
  const Index N = w.rows();
  const Index T = w.cols();
  if (static_cast<Index>(units.size()) != N || static_cast<Index>(periods.size()) != T)
    throw Error(ErrorKind::InvalidInput, "partition sizes do not match the panel");
  const Index G = units.num_clusters;
  const Index C = periods.num_clusters;
  const auto n_g = units.cluster_sizes();
  const auto t_c = periods.cluster_sizes();

  CellMeans out{MatrixXd::Zero(G, T), MatrixXd::Zero(N, C), MatrixXd::Zero(G, C)};
  for (Index i = 0; i < N; ++i) {
    const Index g = units.labels[static_cast<std::size_t>(i)];
    for (Index t = 0; t < T; ++t) {
      const Index c = periods.labels[static_cast<std::size_t>(t)];
      out.by_group_period(g, t) += w(i, t);
      out.by_unit_tcluster(i, c) += w(i, t);
      out.by_group_tcluster(g, c) += w(i, t);
    }
  }
  for (Index g = 0; g < G; ++g) {
    const double ng = static_cast<double>(n_g[static_cast<std::size_t>(g)]);
    out.by_group_period.row(g) /= ng;
    for (Index c = 0; c < C; ++c)
      out.by_group_tcluster(g, c) /= ng * static_cast<double>(t_c[static_cast<std::size_t>(c)]);
  }
  for (Index c = 0; c < C; ++c) out.by_unit_tcluster.col(c) /= static_cast<double>(t_c[static_cast<std::size_t>(c)]);
  return out;
}

int FoldLayout::fold_of(Index unit, Index period) const {
  for (int d = 0; d < 4; ++d)
    if (folds[static_cast<std::size_t>(d)].units.contains(unit) &&
        folds[static_cast<std::size_t>(d)].periods.contains(period))
      return d;
  throw Error(ErrorKind::InvalidInput, "cell outside the fold layout");
}

FoldLayout build_fold_layout(Index num_units, Index num_periods) {
  if (num_units < 4 || num_periods < 4)
    throw Error(ErrorKind::PanelTooSmall, "cross-fitting needs N >= 4 and T >= 4");
  const Index nh = num_units / 2;
  const Index th = num_periods / 2;
  const IndexRange first_units{0, nh}, last_units{nh, num_units};
  const IndexRange first_periods{0, th}, last_periods{th, num_periods};
  FoldLayout layout;
  layout.folds = {FoldLayout::Fold{first_units, first_periods}, FoldLayout::Fold{first_units, last_periods},
                  FoldLayout::Fold{last_units, first_periods}, FoldLayout::Fold{last_units, last_periods}};
  return layout;
}

}  // namespace pcluster
