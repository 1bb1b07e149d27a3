#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covdecay/decay.hpp"
#include "covdecay/errors.hpp"
#include "covdecay/estimate.hpp"
#include "covdecay/harness.hpp"
#include "covdecay/json_io.hpp"
#include "covdecay/simulate.hpp"

namespace py = pybind11;
using namespace covdecay;

namespace {

// nlohmann -> Python via the json module keeps the numeric formatting in one place.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(dump_json(j)); }

std::optional<Marginal> fixed_or_none(const py::object& o) {
  if (o.is_none()) return std::nullopt;
  return o.cast<Marginal>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Covariance decay of copula-based time series";

  static py::exception<Error> base(m, "CovdecayError");
  py::register_exception<IngestionError>(m, "IngestionError", base.ptr());
  py::register_exception<ValidityError>(m, "ValidityError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  py::class_<Marginal>(m, "Marginal")
      .def(py::init([](const std::string& family, const std::vector<double>& params) {
             return Marginal::from_name(family, params);
           }),
           py::arg("family"), py::arg("params"))
      .def_property_readonly("family", &Marginal::family_name)
      .def_property_readonly("params", &Marginal::parameter_list)
      .def("cdf", &Marginal::cdf)
      .def("survival", &Marginal::survival)
      .def("density", &Marginal::density)
      .def("quantile", &Marginal::quantile)
      .def("hoeffding_weight", &Marginal::hoeffding_weight)
      .def("__eq__", &Marginal::operator==)
      .def("__repr__", [](const Marginal& x) { return "Marginal(" + dump_json(to_json(x)) + ")"; });

  m.def(
      "copula_cdf",
      [](const std::string& family, const std::vector<double>& theta, double u, double v) {
        return copula_cdf(CopulaSpec(parse_family(family), theta), u, v);
      },
      py::arg("family"), py::arg("theta"), py::arg("u"), py::arg("v"));
  m.def(
      "hoeffding_cov",
      [](const std::string& family, const std::vector<double>& theta, const Marginal& f0, const Marginal& fn,
         int order) {
        return hoeffding_cov(CopulaSpec(parse_family(family), theta), f0, fn, QuadratureGrid::gauss_legendre(order));
      },
      py::arg("family"), py::arg("theta"), py::arg("f0"), py::arg("fn"), py::arg("order") = 128);
  m.def(
      "k_constants",
      [](const std::string& family, const Marginal& f0, const py::object& fn, int order) {
        const Marginal other = fn.is_none() ? f0 : fn.cast<Marginal>();
        py::gil_scoped_release release;
        const Json j = kconst_json(parse_family(family), f0, other, order);
        py::gil_scoped_acquire acquire;
        return to_py(j);
      },
      py::arg("family"), py::arg("f0"), py::arg("fn") = py::none(), py::arg("order") = 128);

  m.def(
      "schedule_values",
      [](const std::string& schedule, std::size_t count) {
        return schedule_values(DecaySchedule::parse(schedule), count);
      },
      py::arg("schedule"), py::arg("count"));
  m.def("fgm_min_kappa", &fgm_min_kappa, py::arg("n"), py::arg("alpha"));
  m.def(
      "fgm_density",
      [](double alpha, double kappa0, const std::vector<double>& u) {
        return fgm_density(DecaySchedule(FgmPower{alpha, kappa0}), u);
      },
      py::arg("alpha"), py::arg("kappa0"), py::arg("u"));
  m.def(
      "simulate",
      [](const std::string& schedule, const Marginal& marginal, std::size_t n, std::uint64_t seed,
         const std::string& method) {
        PathConfig cfg;
        cfg.n = n;
        cfg.schedule = DecaySchedule::parse(schedule);
        cfg.marginal = marginal;
        cfg.seed = seed;
        const bool fgm = method == "fgm" || (method == "auto" && std::holds_alternative<FgmPower>(cfg.schedule.kind()));
        if (!fgm && method != "auto" && method != "gaussian") throw DomainError("unknown method '" + method + "'");
        py::gil_scoped_release release;
        return fgm ? fgm_path(cfg).values : gaussian_path(cfg).values;
      },
      py::arg("schedule"), py::arg("marginal"), py::arg("n"), py::arg("seed") = 1, py::arg("method") = "auto");

  m.def(
      "lag_estimates",
      [](const std::vector<double>& series, const Marginal& marginal, std::size_t lags) {
        const LagEstimates le = lag_estimates(series, marginal, lags);
        py::dict d;
        d["rho_hat"] = le.rho_hat;
        d["pair_counts"] = le.pair_counts;
        return d;
      },
      py::arg("series"), py::arg("marginal"), py::arg("m"));
  m.def(
      "estimate",
      [](const std::vector<double>& series, const std::string& marginal, std::size_t lags,
         const std::string& distance, const py::object& fixed) {
        EstimateOptions opt;
        opt.marginal = parse_marginal_fit(marginal);
        opt.fixed_marginal = fixed_or_none(fixed);
        opt.m = lags;
        opt.search.distance = parse_distance(distance);
        opt.beta_estimators = true;
        EstimateReport rep;
        {
          py::gil_scoped_release release;
          rep = estimate_pipeline(series, opt);
        }
        return to_py(rep.to_json());
      },
      py::arg("series"), py::arg("marginal") = "normal", py::arg("m") = 25, py::arg("distance") = "l1",
      py::arg("fixed_marginal") = py::none());
  m.def(
      "mc_table",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = ExperimentConfig::from_json(Json::parse(config_json));
        McTable t;
        {
          py::gil_scoped_release release;
          t = run_experiment(cfg);
        }
        return py::make_tuple(t.to_csv(), t.records_csv());
      },
      py::arg("config_json"));
  m.def("git_blob_hash", &git_blob_hash, py::arg("content"));
}
