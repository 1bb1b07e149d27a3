#include "covdecay/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fftw3.h>
#include <openssl/evp.h>

#include "covdecay/errors.hpp"
#include "covdecay/parallel.hpp"
#include "covdecay/simulate.hpp"

namespace covdecay {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << content;
}

std::vector<std::string> estimators_for(Model m) {
  switch (m) {
    case Model::ar1: return {"phi"};
    case Model::ma1: return {"theta"};
    case Model::arfima: return {"d_can", "d_cor"};
  }
  return {};
}

DecaySchedule schedule_for(Model m, double p) {
  switch (m) {
    case Model::ar1: return DecaySchedule(Ar1{p});
    case Model::ma1: return DecaySchedule(MaQ{{1.0, p}});
    case Model::arfima: return DecaySchedule(ArfimaD{p});
  }
  throw ConfigError("unknown model");
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '"' && s.back() == '"' && s.size() >= 2) s = s.substr(1, s.size() - 2);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::string model_name(Model m) {
  switch (m) {
    case Model::ma1: return "ma1";
    case Model::ar1: return "ar1";
    case Model::arfima: return "arfima";
  }
  return "unknown";
}

Model parse_model(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "ma1" || t == "ma") return Model::ma1;
  if (t == "ar1" || t == "ar") return Model::ar1;
  if (t == "arfima") return Model::arfima;
  throw ConfigError("unknown model '" + s + "' (expected ma1, ar1 or arfima)");
}

void ExperimentConfig::validate() const {
  if (params.empty()) throw ConfigError("experiment: empty parameter grid");
  if (replications < 1) throw ConfigError("experiment: replications must be at least 1");
  if (n < 2) throw ConfigError("experiment: n must be at least 2");
  if (m.empty()) throw ConfigError("experiment: empty lag list");
  for (std::size_t k : m)
    if (k < 1 || k >= n) throw ConfigError("experiment: each m must satisfy 1 <= m < n");
  for (double p : params) {
    try {
      (void)schedule_for(model, p);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("experiment: ") + e.what());
    }
    if (model == Model::ma1 && !(std::abs(p) < 1.0))
      throw ConfigError("experiment: MA1 parameter must satisfy |theta| < 1");
  }
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["model"] = model_name(model);
  j["params"] = params;
  j["n"] = n;
  j["replications"] = replications;
  j["m"] = m;
  j["seed"] = seed;
  j["threads"] = threads;
  j["distance"] = covdecay::to_string(distance);
  j["output"] = output;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  try {
    if (!j.contains("model")) throw ConfigError("experiment: missing key 'model'");
    c.model = parse_model(j.at("model").get<std::string>());
    if (!j.contains("params")) throw ConfigError("experiment: missing key 'params'");
    c.params = j.at("params").get<std::vector<double>>();
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
    if (j.value("full", false)) c.replications = 1000;
    if (j.contains("m")) {
      const Json& m = j.at("m");
      c.m = m.is_array() ? m.get<std::vector<std::size_t>>()
                         : std::vector<std::size_t>{m.get<std::size_t>()};
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) {
      const Json& t = j.at("threads");
      c.threads = t.is_string() ? 0 : t.get<int>();
      if (t.is_string() && t.get<std::string>() != "auto")
        throw ConfigError("experiment: threads must be an integer or \"auto\"");
    }
    if (j.contains("distance")) c.distance = parse_distance(j.at("distance").get<std::string>());
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

const McRow& McTable::row(double param, std::size_t m, const std::string& estimator) const {
  for (const auto& r : rows)
    if (r.param == param && r.m == m && r.estimator == estimator) return r;
  throw DomainError("McTable: no row for (" + g17(param) + ", " + std::to_string(m) + ", " +
                    estimator + ")");
}

std::string McTable::to_csv() const {
  std::string out = "param,m,estimator,mean,mse,failures,replications\n";
  for (const auto& r : rows)
    out += g17(r.param) + "," + std::to_string(r.m) + "," + r.estimator + "," + g17(r.mean) + "," +
           g17(r.mse) + "," + std::to_string(r.failures) + "," + std::to_string(r.replications) +
           "\n";
  return out;
}

std::string McTable::records_csv() const {
  std::string out = "param,m,estimator,replication,seed,estimate\n";
  for (const auto& r : records)
    out += g17(r.param) + "," + std::to_string(r.m) + "," + r.estimator + "," +
           std::to_string(r.replication) + "," + std::to_string(r.seed) + "," + g17(r.estimate) +
           "\n";
  return out;
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

McTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> names = estimators_for(cfg.model);
  const std::size_t max_m = cfg.model == Model::arfima ? *std::max_element(cfg.m.begin(), cfg.m.end()) : 1;
  const std::vector<std::size_t> lags = cfg.model == Model::arfima ? cfg.m : std::vector<std::size_t>{1};
  const unsigned threads = resolve_threads(cfg.threads);
  SearchOptions search;
  search.distance = cfg.distance;

  McTable table;
  for (std::size_t pi = 0; pi < cfg.params.size(); ++pi) {
    const double param = cfg.params[pi];
    const DecaySchedule schedule = schedule_for(cfg.model, param);
    const GaussianPathSampler sampler(schedule, cfg.n);
    const std::uint64_t param_seed = derive_seed(cfg.seed, pi);
    // est[r][lag index * names + estimator index]
    const std::size_t width = lags.size() * names.size();
    std::vector<std::vector<double>> est(cfg.replications, std::vector<double>(width, kNaN));
    std::vector<std::uint64_t> seeds(cfg.replications);

    parallel_for(cfg.replications, threads, [&](std::size_t r) {
      seeds[r] = derive_seed(param_seed, r);
      try {
        PathConfig pc;
        pc.n = cfg.n;
        pc.schedule = schedule;
        pc.marginal = Marginal::normal(0.0, 1.0);
        pc.seed = seeds[r];
        const std::vector<double> x = sampler.sample(pc).values;
        const Marginal fit = fit_marginal(x, MarginalFit::normal);
        const LagEstimates all = lag_estimates(x, fit, max_m);
        for (std::size_t li = 0; li < lags.size(); ++li) {
          if (cfg.model == Model::ar1) {
            est[r][0] = all.rho_hat[0];
          } else if (cfg.model == Model::ma1) {
            est[r][0] = ma1_invert(all.rho_hat[0]);
          } else {
            LagEstimates sub;
            sub.m = lags[li];
            sub.rho_hat.assign(all.rho_hat.begin(), all.rho_hat.begin() + lags[li]);
            sub.pair_counts.assign(all.pair_counts.begin(), all.pair_counts.begin() + lags[li]);
            est[r][li * 2 + 0] = estimate_d(sub, DMode::canonical, search).value;
            est[r][li * 2 + 1] = estimate_d(sub, DMode::corrected, search).value;
          }
        }
      } catch (const Error&) {
        // Left as NaN and counted as a failure.
      }
    });

    for (std::size_t li = 0; li < lags.size(); ++li) {
      for (std::size_t ei = 0; ei < names.size(); ++ei) {
        McRow row;
        row.param = param;
        row.m = lags[li];
        row.estimator = names[ei];
        row.replications = cfg.replications;
        double sum = 0.0;
        double sq = 0.0;
        std::size_t ok = 0;
        for (std::size_t r = 0; r < cfg.replications; ++r) {
          const double v = est[r][li * names.size() + ei];
          table.records.push_back({param, lags[li], names[ei], r, seeds[r], v});
          if (std::isnan(v)) continue;
          sum += v;
          sq += (v - param) * (v - param);
          ++ok;
        }
        row.failures = cfg.replications - ok;
        if (static_cast<double>(row.failures) > 0.01 * static_cast<double>(cfg.replications))
          throw Error("run_experiment: " + std::to_string(row.failures) + " of " +
                      std::to_string(cfg.replications) + " replications failed for " +
                      model_name(cfg.model) + "(" + g17(param) + "); aborting");
        row.mean = ok ? sum / static_cast<double>(ok) : kNaN;
        row.mse = ok ? sq / static_cast<double>(ok) : kNaN;
        table.rows.push_back(row);
      }
    }
  }

  if (!cfg.output.empty()) {
    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    write_file(dir / "table.csv", table.to_csv());
    write_file(dir / "replications.csv", table.records_csv());
    Json manifest;
    const Json config = cfg.to_json();
    manifest["config"] = config;
    manifest["input_hash"] = git_blob_hash(dump_json(config));
    manifest["simulation"] = "exact Gaussian-copula route: Toeplitz correlation matrix and Cholesky factor";
    manifest["threads"] = threads;
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / "manifest.json", dump_json(manifest, 2) + "\n");
  }
  return table;
}

// ---------------------------------------------------------------------------
// Real-data analysis
// ---------------------------------------------------------------------------

std::vector<double> parse_series_csv(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t comma = sv.rfind(',');
    const std::string_view field = comma == std::string_view::npos ? sv : sv.substr(comma + 1);
    double v = 0.0;
    if (!parse_double(field, v)) {
      if (!seen_data && out.empty()) {
        seen_data = true;  // header row
        continue;
      }
      throw IngestionError("line " + std::to_string(lineno) + ": non-numeric value '" +
                               std::string(field) + "'",
                           lineno);
    }
    seen_data = true;
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_series_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_series_csv(ss.str());
}

std::string series_to_csv(const std::vector<double>& xs) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < xs.size(); ++i) out += std::to_string(i + 1) + "," + g17(xs[i]) + "\n";
  return out;
}

std::vector<double> log_returns(const std::vector<double>& prices) {
  if (prices.size() < 2) throw InsufficientDataError("log_returns: need at least two prices");
  std::vector<double> r(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    if (!(prices[t] > 0.0 && prices[t - 1] > 0.0))
      throw DomainError("log_returns: prices must be positive (row " + std::to_string(t + 1) + ")");
    r[t - 1] = std::log(prices[t] / prices[t - 1]);
  }
  return r;
}

std::vector<double> sample_acf(const std::vector<double>& xs, std::size_t max_lag) {
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientDataError("sample_acf: series too short");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double x : xs) c0 += (x - mean) * (x - mean);
  if (!(c0 > 0.0)) throw DegenerateError("sample_acf: zero variance");
  std::vector<double> acf(std::min(max_lag, n - 1));
  for (std::size_t h = 1; h <= acf.size(); ++h) {
    double c = 0.0;
    for (std::size_t t = 0; t + h < n; ++t) c += (xs[t] - mean) * (xs[t + h] - mean);
    acf[h - 1] = c / c0;
  }
  return acf;
}

std::vector<std::pair<double, double>> periodogram(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) throw InsufficientDataError("periodogram: series too short");
  std::vector<double> in(xs);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  std::vector<std::pair<double, double>> result;
  result.reserve(static_cast<std::size_t>(n / 2));
  for (int j = 1; j <= n / 2; ++j) {
    const double lambda = 2.0 * kPi * j / n;
    result.emplace_back(lambda, std::norm(out[static_cast<std::size_t>(j)]) / (2.0 * kPi * n));
  }
  return result;
}

Histogram histogram(const std::vector<double>& xs) {
  if (xs.empty()) throw InsufficientDataError("histogram: empty series");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const std::size_t bins =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(xs.size())))) + 1;
  Histogram h;
  h.counts.assign(bins, 0);
  const double lo = *mn;
  const double hi = *mx > *mn ? *mx : *mn + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  for (double x : xs) {
    std::size_t b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

AnalyzeResult analyze(const std::vector<double>& raw, const AnalyzeOptions& opt) {
  AnalyzeResult res;
  res.series = opt.input == InputKind::prices ? log_returns(raw) : raw;
  if (opt.absolute)
    for (double& x : res.series) x = std::abs(x);

  res.acf = sample_acf(res.series, opt.acf_lags);
  res.periodogram = periodogram(res.series);
  res.hist = histogram(res.series);

  EstimateOptions eo;
  eo.marginal = opt.marginal;
  eo.fixed_marginal = opt.fixed_marginal;
  eo.m = opt.m;
  eo.search = opt.search;
  eo.beta_estimators = true;
  res.report = estimate_pipeline(res.series, eo);

  if (opt.bootstrap_b > 0) {
    const Statistic d_cor = [&](const std::vector<double>& xs) {
      const Marginal f = opt.fixed_marginal ? *opt.fixed_marginal : fit_marginal(xs, opt.marginal);
      return estimate_d(lag_estimates(xs, f, opt.m), DMode::corrected, opt.search).value;
    };
    const BootstrapResult b = stationary_bootstrap(res.series, d_cor, opt.bootstrap_mean_block,
                                                   opt.bootstrap_b, opt.seed, opt.threads);
    res.report.d_cor->ci95 = std::make_pair(b.lo95, b.hi95);
    res.report.d_cor->bootstrap_sd = b.sd;
    res.report.beta_cor->ci95 = std::make_pair(1.0 - 2.0 * b.hi95, 1.0 - 2.0 * b.lo95);
    res.report.beta_cor->bootstrap_sd = 2.0 * b.sd;
    if (b.missing > 0)
      res.warnings.push_back(std::to_string(b.missing) + " bootstrap replicates failed");
  }
  return res;
}

AnalyzeResult analyze_file(const std::string& path, const AnalyzeOptions& opt) {
  return analyze(read_series_csv(path), opt);
}

Json AnalyzeResult::to_json() const {
  Json j;
  j["n"] = series.size();
  j["report"] = report.to_json();
  j["acf"] = acf;
  Json pg = Json::array();
  for (const auto& [lambda, value] : periodogram) pg.push_back({lambda, value});
  j["periodogram"] = pg;
  j["histogram"] = {{"edges", hist.edges}, {"counts", hist.counts}};
  std::vector<std::string> w = report.warnings;
  w.insert(w.end(), warnings.begin(), warnings.end());
  j["warnings"] = w;
  return j;
}

Json kconst_json(Family family, const Marginal& f0, const Marginal& fn, int order) {
  const DecayConstants k = k_constants(family, f0, fn, QuadratureGrid::gauss_legendre(order));
  Json j = to_json(k);
  j["marginal0"] = to_json(f0);
  j["marginaln"] = to_json(fn);
  return j;
}

}  // namespace covdecay
