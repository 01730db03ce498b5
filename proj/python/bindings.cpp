#include "pcluster/benchmarks.hpp"
#include "pcluster/cli.hpp"
#include "pcluster/clustering.hpp"
#include "pcluster/error.hpp"
#include "pcluster/io.hpp"
#include "pcluster/methods.hpp"
#include "pcluster/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pcluster;

namespace {

PanelData make_panel(const MatrixXd& y, const std::vector<MatrixXd>& xs) { return PanelData(y, xs); }

py::dict result_dict(const EstimateResult& r) {
  py::dict d;
  d["method"] = r.method;
  d["beta"] = r.beta;
  d["se"] = r.se;
  d["dof"] = r.dof;
  d["n_obs"] = r.n_obs;
  d["G"] = r.unit_clusters;
  d["C"] = r.time_clusters;
  d["residuals"] = r.residuals;
  d["num_factors"] = r.num_factors ? py::object(py::int_(*r.num_factors)) : py::object(py::none());
  d["converged"] = r.converged;
  return d;
}

Method method_from(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw Error(ErrorKind::InvalidInput, "unknown estimator '" + name + "'");
  return *m;
}

py::dict estimate(const MatrixXd& y, const std::vector<MatrixXd>& xs, const std::string& estimator,
                  std::optional<int> G, std::optional<int> C, int n_starts, std::uint64_t seed, bool hierarchical,
                  bool standardize_data) {
  const PanelData panel = make_panel(y, xs);
  const EstimatorSpec spec{method_from(estimator), G, C, n_starts, hierarchical};
  if (!standardize_data) return result_dict(run_estimator(spec, panel, Seed(seed)));
  const Standardization s = fit_standardization(panel);
  return result_dict(rescale(run_estimator(spec, standardize(panel, s), Seed(seed)), s));
}

py::dict cluster(const MatrixXd& y, const std::vector<MatrixXd>& xs, std::optional<int> G, std::optional<int> C,
                 int n_starts, std::uint64_t seed) {
  const auto cl = two_way_cluster(make_panel(y, xs), G, C, KMeansOptions{n_starts, Seed(seed)});
  py::dict d;
  d["unit_labels"] = cl.units.partition.labels;
  d["time_labels"] = cl.periods.partition.labels;
  d["G"] = cl.units.partition.num_clusters;
  d["C"] = cl.periods.partition.num_clusters;
  d["unit_centers"] = cl.units.partition.centers;
  d["time_centers"] = cl.periods.partition.centers;
  d["unit_noise"] = cl.inputs.unit_noise;
  d["time_noise"] = cl.inputs.period_noise;
  d["unit_objectives"] = cl.unit_selection ? cl.unit_selection->objectives : std::vector<double>{};
  d["time_objectives"] = cl.period_selection ? cl.period_selection->objectives : std::vector<double>{};
  return d;
}

DgpConfig config(Index N, Index T, int dgp, double rho, double kappa, double beta, int burn_in, std::uint64_t seed) {
  DgpConfig c;
  c.num_units = N;
  c.num_periods = T;
  c.dgp = dgp;
  c.rho = rho;
  c.kappa = kappa;
  c.beta = beta;
  c.burn_in = burn_in;
  c.seed = seed;
  return c;
}

py::dict simulate(Index N, Index T, int dgp, double rho, double kappa, double beta, int burn_in, std::uint64_t seed) {
  const DgpDraw d = simulate_panel(config(N, T, dgp, rho, kappa, beta, burn_in, seed), Seed(seed));
  py::dict out;
  out["y"] = d.panel.y();
  out["x"] = d.panel.x(0);
  out["alpha"] = d.alpha;
  out["gamma"] = d.gamma;
  out["u"] = d.u;
  out["v"] = d.v;
  out["f"] = d.f;
  out["h"] = d.h;
  return out;
}

py::list monte_carlo(const std::vector<std::string>& estimators, int reps, Index N, Index T, int dgp, double rho,
                     double kappa, double beta, int burn_in, std::uint64_t seed, int threads, int n_starts) {
  std::vector<NamedEstimator> est;
  for (const auto& name : estimators) {
    EstimatorSpec spec;
    spec.method = method_from(name);
    spec.n_starts = n_starts;
    est.push_back(named_estimator(spec));
  }
  std::vector<McSummary> rows;
  {
    py::gil_scoped_release release;
    rows = run_monte_carlo(config(N, T, dgp, rho, kappa, beta, burn_in, seed), est, reps, threads);
  }
  py::list out;
  for (const auto& s : rows) {
    py::dict d;
    d["estimator"] = s.estimator;
    d["bias"] = s.bias;
    d["variance"] = s.variance;
    d["coverage"] = s.coverage;
    d["width"] = s.width;
    d["G_hat"] = s.mean_unit_clusters;
    d["C_hat"] = s.mean_time_clusters;
    d["n_reps"] = s.n_reps;
    d["n_failed"] = s.n_failed;
    out.append(d);
  }
  return out;
}

py::dict read_csv(const std::string& path) {
  const PanelData p = read_panel_csv_file(path);
  py::dict d;
  d["y"] = p.y();
  d["x"] = p.xs();
  d["unit_ids"] = p.unit_ids();
  d["time_ids"] = p.time_ids();
  return d;
}

}  // namespace

PYBIND11_MODULE(_pcluster, m) {
  m.doc() = "Two-way grouped fixed effects estimation for panel data";

  static py::exception<Error> panel_error(m, "PanelError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = panel_error;
      py::object inst = err(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(panel_error.ptr(), inst.ptr());
    }
  });

  using namespace py::literals;
  m.def("estimate", &estimate, "y"_a, "x"_a, "estimator"_a = "baseline", "G"_a = py::none(), "C"_a = py::none(),
        "n_starts"_a = kDefaultStarts, "seed"_a = 1, "hierarchical"_a = false, "standardize"_a = false,
        "Estimate the slope coefficients of an N x T panel; x is a list of N x T regressors.");
  m.def("cluster", &cluster, "y"_a, "x"_a, "G"_a = py::none(), "C"_a = py::none(), "n_starts"_a = kDefaultStarts,
        "seed"_a = 1, "Two-way k-means clustering with data-driven cluster counts.");
  m.def("simulate_panel", &simulate, "N"_a = 50, "T"_a = 50, "dgp"_a = 1, "rho"_a = 0.0, "kappa"_a = 0.0,
        "beta"_a = 1.0, "burn_in"_a = 10000, "seed"_a = 0, "Draw one panel from a simulation design.");
  m.def("monte_carlo", &monte_carlo, "estimators"_a, "reps"_a, "N"_a = 50, "T"_a = 50, "dgp"_a = 1, "rho"_a = 0.0,
        "kappa"_a = 0.0, "beta"_a = 1.0, "burn_in"_a = 10000, "seed"_a = 0, "threads"_a = 1,
        "n_starts"_a = kDefaultStarts, "Monte Carlo bias, variance, coverage and interval width per estimator.");
  m.def("read_panel_csv", &read_csv, "path"_a, "Read a unit,time,y,x1.. CSV into arrays.");
  m.def("pseudo_distance", [](const MatrixXd& y, const std::vector<MatrixXd>& xs) {
    const auto d = pseudo_distance_units(make_panel(y, xs));
    return py::make_tuple(d.distances, d.sigma, d.threshold);
  }, "y"_a, "x"_a, "Unit pseudo-distance matrix, noise scale and merge threshold.");
  m.def("eigenvalue_ratio_factors", [](const std::vector<double>& eig, int max_factors) {
    return eigenvalue_ratio_factors(eig, max_factors);
  }, "eigenvalues"_a, "max_factors"_a);
}
