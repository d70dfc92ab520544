#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "bccp/baselines.hpp"
#include "bccp/conformal.hpp"
#include "bccp/error.hpp"
#include "bccp/evaluation.hpp"
#include "bccp/simulation.hpp"

namespace py = pybind11;
using namespace bccp;

namespace {

using Pair = std::pair<double, double>;

Pair to_pair(const PredictionInterval& iv) { return {iv.lower, iv.upper}; }

std::vector<Pair> to_pairs(const IntervalSet& set) {
  std::vector<Pair> out;
  for (const auto& s : set.segments()) out.push_back(to_pair(s));
  return out;
}

py::tuple dataset_tuple(const Dataset& d) {
  return py::make_tuple(d.features, py::array_t<double>(d.y.size(), d.y.data()));
}

py::dict row_dict(const ReportRow& r) {
  py::dict d;
  d["method"] = r.method;
  d["group"] = r.group;
  d["n"] = r.n;
  d["coverage"] = r.coverage;
  d["coverage_se"] = r.coverage_se;
  d["mean_width"] = r.mean_width;
  d["mean_width_se"] = r.mean_width_se;
  d["inf_width_count"] = r.inf_width_count;
  d["discontiguity_rate"] = r.discontiguity_rate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conformal and baseline prediction intervals";
  py::register_exception<Error>(m, "BccpError", PyExc_ValueError);

  py::class_<BinPartition>(m, "Partition")
      .def_static("whole", &BinPartition::whole, py::arg("support_min") = -kInf)
      .def_property_readonly("breakpoints", &BinPartition::breakpoints)
      .def_property_readonly("support_min", &BinPartition::support_min)
      .def_property_readonly("bin_count", &BinPartition::bin_count)
      .def_property_readonly("collapsed", &BinPartition::collapsed)
      .def("bounds", [](const BinPartition& p, std::size_t b) {
        return Pair{p.bin_lower(b), p.bin_upper(b)};
      })
      .def("assign", &BinPartition::assign, py::arg("y"));

  m.def("bins_from_cutpoints",
        [](const std::vector<double>& cuts, double support_min) {
          return bins_from_cutpoints(cuts, support_min);
        },
        py::arg("cutpoints"), py::arg("support_min") = -kInf);
  m.def("bins_from_percentiles",
        [](const std::vector<double>& y, std::size_t k, double support_min) {
          return bins_from_percentiles(y, k, support_min);
        },
        py::arg("y"), py::arg("k"), py::arg("support_min") = -kInf);

  m.def("finite_sample_quantile",
        [](const std::vector<double>& s, double alpha) { return finite_sample_quantile(s, alpha); },
        py::arg("scores"), py::arg("alpha"));
  m.def("conformal_pvalue",
        [](double c, const std::vector<double>& s) { return conformal_pvalue(c, s); },
        py::arg("score"), py::arg("scores"));
  m.def("grid_interval",
        [](double y_hat, const std::vector<double>& scores, const std::vector<double>& grid,
           double alpha) { return to_pairs(grid_interval(y_hat, scores, grid, alpha).set); },
        py::arg("y_hat"), py::arg("scores"), py::arg("grid"), py::arg("alpha"));

  py::class_<ConformalCalibration>(m, "Calibration")
      .def(py::init([](const std::vector<double>& y, const std::vector<double>& y_pred,
                       double alpha, std::optional<BinPartition> partition,
                       const std::string& transform, bool allow_empty_bins) {
             return ConformalCalibration(
                 y, y_pred, alpha, partition.value_or(BinPartition::whole()),
                 CalibrationOptions{OutcomeTransform::parse(transform), allow_empty_bins});
           }),
           py::arg("y_true"), py::arg("y_pred"), py::arg("alpha"),
           py::arg("partition") = py::none(), py::arg("transform") = "identity",
           py::arg("allow_empty_bins") = false)
      .def_property_readonly("alpha", &ConformalCalibration::alpha)
      .def_property_readonly("partition", &ConformalCalibration::partition)
      .def_property_readonly("global_quantile", &ConformalCalibration::global_quantile)
      .def_property_readonly("bin_quantiles",
                             [](const ConformalCalibration& c) {
                               std::vector<double> q;
                               for (std::size_t b = 0; b < c.partition().bin_count(); ++b)
                                 q.push_back(c.bin_quantile(b));
                               return q;
                             })
      .def("scp", [](const ConformalCalibration& c, double y_hat) {
        return to_pair(scp_interval(y_hat, c).interval);
      }, py::arg("y_hat"))
      .def("bccp_d", [](const ConformalCalibration& c, double y_hat) {
        return to_pairs(bccp_discontiguous(y_hat, c).set);
      }, py::arg("y_hat"))
      .def("bccp_c", [](const ConformalCalibration& c, double y_hat) {
        return to_pair(bccp_contiguous(y_hat, c).interval);
      }, py::arg("y_hat"))
      .def("flags", [](const ConformalCalibration& c, double y_hat) {
        return bccp_discontiguous(y_hat, c).flags.to_string();
      }, py::arg("y_hat"));

  m.def("lognormal_interval",
        [](double y_hat_log, double sigma, double alpha) {
          return to_pair(lognormal_interval(y_hat_log, sigma, alpha));
        },
        py::arg("y_hat_log"), py::arg("sigma"), py::arg("alpha"));
  m.def("poisson_interval", [](double mu, double alpha) { return to_pair(poisson_interval(mu, alpha)); },
        py::arg("mu"), py::arg("alpha"));
  m.def("negbinom_interval",
        [](double mu, double size, double alpha) { return to_pair(negbinom_interval(mu, size, alpha)); },
        py::arg("mu"), py::arg("size"), py::arg("alpha"));
  m.def("bootstrap_interval",
        [](double y_hat, const std::vector<double>& y_true, const std::vector<double>& y_pred,
           double alpha, std::size_t draws, std::uint64_t seed, const std::string& scale,
           double support_min) {
          const auto t = OutcomeTransform::parse(scale);
          const auto pool = ResidualPool::from_calibration(y_true, y_pred, t);
          return to_pair(bootstrap_interval(t.forward(y_hat), pool, alpha, draws, seed, support_min));
        },
        py::arg("y_hat"), py::arg("y_true"), py::arg("y_pred"), py::arg("alpha"),
        py::arg("draws") = 2000, py::arg("seed") = 1, py::arg("scale") = "identity",
        py::arg("support_min") = -kInf);

  py::class_<QuantileFit>(m, "QuantileFit")
      .def_readonly("tau", &QuantileFit::tau)
      .def_readonly("coefficients", &QuantileFit::coefficients)
      .def_readonly("iterations", &QuantileFit::iterations)
      .def_readonly("converged", &QuantileFit::converged)
      .def_readonly("loss", &QuantileFit::loss);
  m.def("quantreg_fit",
        [](const Matrix& x, const std::vector<double>& y, double tau) { return quantreg_fit(x, y, tau); },
        py::arg("features"), py::arg("y"), py::arg("tau"));

  m.def("lognormal_dgp",
        [](std::size_t n, std::uint64_t seed, double sigma) {
          return dataset_tuple(lognormal_dgp(n, seed, sigma));
        },
        py::arg("n"), py::arg("seed"), py::arg("sigma") = 0.5);
  m.def("zero_inflated_count_dgp",
        [](std::size_t n, std::uint64_t seed, double zero_prob) {
          CountDgpParams p;
          p.zero_prob = zero_prob;
          return dataset_tuple(zero_inflated_count_dgp(n, seed, p));
        },
        py::arg("n"), py::arg("seed"), py::arg("zero_prob") = 0.867);

  m.def("run_study",
        [](const std::string& study, std::size_t replications, std::uint64_t seed,
           std::optional<std::size_t> n, std::optional<std::vector<std::string>> methods,
           unsigned threads) {
          auto config = study == "count" ? StudyConfig::count_study()
                        : study == "lognormal"
                            ? StudyConfig::lognormal_study()
                            : throw Error(ErrorCode::invalid_argument, "unknown study: " + study);
          config.replications = replications;
          config.seed = seed;
          config.threads = threads;
          if (n) config.n = *n;
          if (methods) {
            config.methods.clear();
            for (const auto& s : *methods) config.methods.push_back(MethodSpec::parse(s));
          }
          ReplicationReport report;
          {
            py::gil_scoped_release release;
            report = run_replications(config);
          }
          py::list rows;
          for (const auto& r : report.rows) rows.append(row_dict(r));
          return rows;
        },
        py::arg("study") = "lognormal", py::arg("replications") = 10, py::arg("seed") = 1,
        py::arg("n") = py::none(), py::arg("methods") = py::none(), py::arg("threads") = 0);
}
