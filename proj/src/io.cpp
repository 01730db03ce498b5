#include "pcluster/io.hpp"

#include "pcluster/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcluster {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_double(const std::string& field, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last)
    throw Error(ErrorKind::InvalidInput,
                "line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + field + "'");
  return v;
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

PanelData read_panel_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.size() < 4 || header[0] != "unit" || header[1] != "time" || header[2] != "y")
    throw Error(ErrorKind::InvalidInput,
                "line " + std::to_string(line_no) + ": header must be unit,time,y,x1[,x2..]");
  const std::size_t K = header.size() - 3;

  std::vector<PanelRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, found " +
                                               std::to_string(fields.size()));
    PanelRow row;
    row.unit = fields[0];
    row.time = fields[1];
    row.line = line_no;
    row.y = parse_double(fields[2], line_no, header[2]);
    row.x.reserve(K);
    for (std::size_t k = 0; k < K; ++k) row.x.push_back(parse_double(fields[3 + k], line_no, header[3 + k]));
    rows.push_back(std::move(row));
  }
  return validate_panel(rows);
}

PanelData read_panel_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  return read_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const PanelData& panel) {
  out << "unit,time,y";
  for (Index k = 0; k < panel.num_regressors(); ++k) out << ",x" << (k + 1);
  out << '\n';
  for (Index i = 0; i < panel.num_units(); ++i) {
    for (Index t = 0; t < panel.num_periods(); ++t) {
      out << panel.unit_ids()[static_cast<std::size_t>(i)] << ',' << panel.time_ids()[static_cast<std::size_t>(t)]
          << ',';
      write_double(out, panel.y()(i, t));
      for (Index k = 0; k < panel.num_regressors(); ++k) {
        out << ',';
        write_double(out, panel.x(k)(i, t));
      }
      out << '\n';
    }
  }
}

void write_partition_csv(std::ostream& out, const std::vector<std::string>& ids, const Partition& partition) {
  if (ids.size() != partition.size()) throw Error(ErrorKind::InvalidInput, "id count does not match partition");
  out << "entity_id,cluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << partition.labels[i] + 1 << '\n';
}

nlohmann::json to_json(const EstimateResult& r) {
  auto counts = [](const std::vector<int>& v) -> nlohmann::json {
    if (v.empty()) return nullptr;
    if (v.size() == 1) return v.front();
    return v;
  };
  nlohmann::json j;
  j["method"] = r.method;
  j["beta"] = std::vector<double>(r.beta.data(), r.beta.data() + r.beta.size());
  j["se"] = std::vector<double>(r.se.data(), r.se.data() + r.se.size());
  j["dof"] = r.dof;
  j["G"] = counts(r.unit_clusters);
  j["C"] = counts(r.time_clusters);
  j["n_obs"] = r.n_obs;
  if (r.num_factors) j["num_factors"] = *r.num_factors;
  if (!r.converged) j["converged"] = false;
  return j;
}

double normal_p_value(double beta, double se) {
  if (!(se > 0.0)) return beta == 0.0 ? 1.0 : 0.0;
  return std::erfc(std::abs(beta / se) / std::sqrt(2.0));
}

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "estimator,T,Bias,Var,Cov,Wid,G_hat,C_hat,n_reps,n_failed\n";
  for (const auto& row : rows) {
    const McSummary& s = row.summary;
    out << s.estimator << ',' << row.num_periods;
    for (double v : {s.bias, s.variance, s.coverage, s.width, s.mean_unit_clusters, s.mean_time_clusters}) {
      out << ',';
      if (std::isfinite(v))
        write_double(out, v);
      else
        out << "NA";
    }
    out << ',' << s.n_reps << ',' << s.n_failed << '\n';
  }
}

}  // namespace pcluster
