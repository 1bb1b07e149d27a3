// covdecay command line tool.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "covdecay/errors.hpp"
#include "covdecay/harness.hpp"
#include "covdecay/json_io.hpp"
#include "covdecay/simulate.hpp"

using namespace covdecay;

namespace {

/// "family:p1,p2" -> Marginal, e.g. "normal:0,1", "exp:2", "exp-rate:10.688".
Marginal parse_marginal(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string family = text.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || item.empty())
        throw DomainError("cannot parse marginal parameter '" + item + "'");
      params.push_back(v);
    }
  }
  return Marginal::from_name(family, params);
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-parameterized covariance decay: simulation, decay constants and estimation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a path with a prescribed lag schedule");
  std::string sim_schedule;
  std::string sim_marginal = "normal:0,1";
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  std::string sim_method = "auto";
  sim->add_option("--schedule", sim_schedule,
                  "ar1:PHI | ma:1,T1,... | arfima:D | arma21 | fgm:ALPHA,KAPPA0 | linear:C0,... | "
                  "explicit:R1,...")
      ->required();
  sim->add_option("--marginal", sim_marginal,
                  "normal:MU,SIGMA | exp:SCALE | exp-rate:RATE | evi:A,B | triangular:A,B");
  sim->add_option("--n", sim_n, "Path length")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  sim->add_option("--seed", sim_seed, "64-bit seed");
  sim->add_option("--out", sim_out, "Output CSV (default stdout)");
  sim->add_option("--method", sim_method, "auto | gaussian | fgm")
      ->check(CLI::IsMember({"auto", "gaussian", "fgm"}));

  // estimate
  auto* est = app.add_subcommand("estimate", "Run the estimation pipeline on a series CSV");
  std::string est_in;
  std::string est_marginal = "normal";
  std::size_t est_m = 25;
  std::string est_distance = "l1";
  std::string est_traces;
  est->add_option("--in", est_in, "Series CSV (last column is used)")->required();
  est->add_option("--marginal", est_marginal, "normal | exp")
      ->check(CLI::IsMember({"normal", "exp"}));
  est->add_option("--m", est_m, "Maximum lag")->check(CLI::PositiveNumber);
  est->add_option("--distance", est_distance, "l1 | l2")->check(CLI::IsMember({"l1", "l2"}));
  est->add_option("--traces", est_traces, "Write per-lag traces CSV here");

  // kconst
  auto* kc = app.add_subcommand("kconst", "Decay constants K1 and K2 at the independence anchor");
  std::string kc_family;
  std::string kc_m0;
  std::string kc_mn;
  int kc_order = QuadratureGrid::kDefaultOrder;
  kc->add_option("--family", kc_family,
                 "fgm | amh | gumbel-barnett | frank | gaussian | tawn | mix3")
      ->required();
  kc->add_option("--marginal0", kc_m0, "Marginal of X_0")->required();
  kc->add_option("--marginaln", kc_mn, "Marginal of X_n (default: marginal0)");
  kc->add_option("--order", kc_order, "Gauss-Legendre order per axis")->check(CLI::Range(2, 4096));

  // mc-table
  auto* mc = app.add_subcommand("mc-table", "Monte Carlo table from a JSON experiment config");
  std::string mc_config;
  std::string mc_out;
  int mc_threads = -1;
  mc->add_option("--config", mc_config, "Experiment config JSON")->required();
  mc->add_option("--out", mc_out, "Output directory (overrides config)");
  mc->add_option("--threads", mc_threads, "Worker threads (overrides config)");

  // analyze
  auto* an = app.add_subcommand("analyze", "Diagnostics and estimation for a price or series CSV");
  std::string an_in;
  bool an_abs = false;
  bool an_series = false;
  std::size_t an_m = 25;
  std::size_t an_acf = 50;
  double an_block = 1000.0;
  std::size_t an_b = 0;
  std::uint64_t an_seed = 1;
  std::string an_marginal = "exp";
  std::string an_fixed;
  std::string an_out;
  std::string an_traces;
  std::string an_export;
  an->add_option("--in", an_in, "CSV of prices (or of the series with --series)")->required();
  an->add_flag("--abs", an_abs, "Use absolute values");
  an->add_flag("--series", an_series, "Input is the series itself, not prices");
  an->add_option("--m", an_m, "Maximum lag")->check(CLI::PositiveNumber);
  an->add_option("--acf-lags", an_acf, "Sample ACF lags");
  an->add_option("--bootstrap-mean-block", an_block, "Mean geometric block length");
  an->add_option("--bootstrap-b", an_b, "Bootstrap replicates (0 disables)");
  an->add_option("--seed", an_seed, "Bootstrap seed");
  an->add_option("--marginal", an_marginal, "Fitted family: normal | exp")
      ->check(CLI::IsMember({"normal", "exp"}));
  an->add_option("--fixed-marginal", an_fixed,
                 "Use this marginal instead of fitting; state the exponential convention as "
                 "exp-rate:RATE or exp:SCALE");
  an->add_option("--out", an_out, "Report JSON (default stdout)");
  an->add_option("--traces", an_traces, "Per-lag traces CSV");
  an->add_option("--export", an_export, "Write the analyzed series as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      PathConfig cfg;
      cfg.n = sim_n;
      cfg.schedule = DecaySchedule::parse(sim_schedule);
      cfg.marginal = parse_marginal(sim_marginal);
      cfg.seed = sim_seed;
      const bool fgm = sim_method == "fgm" ||
                       (sim_method == "auto" && std::holds_alternative<FgmPower>(cfg.schedule.kind()));
      const SeriesPath path = fgm ? fgm_path(cfg) : gaussian_path(cfg);
      write_or_print(sim_out, path_to_csv(path));
    } else if (*est) {
      EstimateOptions opt;
      opt.marginal = parse_marginal_fit(est_marginal);
      opt.m = est_m;
      opt.search.distance = parse_distance(est_distance);
      opt.beta_estimators = est_m >= 2;
      const EstimateReport rep = estimate_pipeline(read_series_csv(est_in), opt);
      std::cout << dump_json(rep.to_json(), 2) << "\n";
      if (!est_traces.empty()) write_or_print(est_traces, rep.traces_csv());
    } else if (*kc) {
      const Marginal m0 = parse_marginal(kc_m0);
      const Marginal mn = kc_mn.empty() ? m0 : parse_marginal(kc_mn);
      std::cout << dump_json(kconst_json(parse_family(kc_family), m0, mn, kc_order), 2) << "\n";
    } else if (*mc) {
      std::ifstream in(mc_config);
      if (!in) throw ConfigError("cannot open " + mc_config);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + mc_config + ": " + e.what());
      }
      ExperimentConfig cfg = ExperimentConfig::from_json(j);
      if (!mc_out.empty()) cfg.output = mc_out;
      if (mc_threads >= 0) cfg.threads = mc_threads;
      const McTable table = run_experiment(cfg);
      std::cout << table.to_csv();
    } else if (*an) {
      AnalyzeOptions opt;
      opt.input = an_series ? InputKind::series : InputKind::prices;
      opt.absolute = an_abs;
      opt.marginal = parse_marginal_fit(an_marginal);
      if (!an_fixed.empty()) opt.fixed_marginal = parse_marginal(an_fixed);
      opt.m = an_m;
      opt.acf_lags = an_acf;
      opt.bootstrap_mean_block = an_block;
      opt.bootstrap_b = an_b;
      opt.seed = an_seed;
      const AnalyzeResult res = analyze_file(an_in, opt);
      for (const auto& w : res.report.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      write_or_print(an_out, dump_json(res.to_json(), 2) + "\n");
      if (!an_traces.empty()) write_or_print(an_traces, res.report.traces_csv());
      if (!an_export.empty()) write_or_print(an_export, series_to_csv(res.series));
    }
  } catch (const IngestionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
