// Acceptance run: one PASS/FAIL line per criterion, details indented above it.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "covdecay/decay.hpp"
#include "covdecay/errors.hpp"
#include "covdecay/estimate.hpp"
#include "covdecay/harness.hpp"
#include "covdecay/numerics.hpp"
#include "covdecay/simulate.hpp"

using namespace covdecay;
namespace fs = std::filesystem;

namespace {

constexpr double kLn2Sq = std::numbers::ln2 * std::numbers::ln2;
constexpr std::size_t kReps = 200;
constexpr std::size_t kN = 1000;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

  bool check(const std::string& what, double value, double target, double tol) {
    const bool ok = std::isfinite(value) && std::abs(value - target) <= tol;
    std::printf("    %-44s %12.6f  target %10.6f +- %-8g %s\n", what.c_str(), value, target, tol,
                ok ? "ok" : "MISS");
    ok_ = ok_ && ok;
    return ok;
  }

  bool require(const std::string& what, bool ok) {
    std::printf("    %-44s %s\n", what.c_str(), ok ? "ok" : "MISS");
    ok_ = ok_ && ok;
    return ok;
  }

  void note(const std::string& text) const { std::printf("    %s\n", text.c_str()); }

  bool finish() const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::printf("[%s] %s (%.1f s)\n", ok_ ? "PASS" : "FAIL", title_.c_str(), secs);
    std::fflush(stdout);
    return ok_;
  }

  void fail(const std::string& why) {
    note("error: " + why);
    ok_ = false;
  }

 private:
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

bool criterion1() {
  Criterion c("1 K-constant oracles at grid order 128");
  const QuadratureGrid g = QuadratureGrid::gauss_legendre(128);
  const Marginal exp1 = Marginal::exponential_scale(1);
  const Marginal evi = Marginal::evi(0, 1);
  const Marginal nrm = Marginal::normal(0, 1);
  const Marginal tri = Marginal::triangular(0, 1);

  const DecayConstants amh = k_constants(Family::amh, exp1, exp1, g);
  c.check("AMH/Exp(1) K1", amh.k1_scalar(), 0.25, 1e-4);
  c.check("AMH/Exp(1) K2", amh.k2_scalar(), 0.05556, 1e-4);
  const DecayConstants gb = k_constants(Family::gumbel_barnett, evi, evi, g);
  c.check("Gumbel-Barnett/EVI(0,1) K1", gb.k1_scalar(), 1.0, 1e-3);
  c.check("Gumbel-Barnett/EVI(0,1) K2", gb.k2_scalar(), 1.0, 1e-3);
  const DecayConstants fr = k_constants(Family::frank, evi, evi, g);
  c.check("Frank/EVI(0,1) K1", fr.k1_scalar(), 0.24023, 1e-3);
  const DecayConstants tw = k_constants(Family::tawn_mixed, evi, evi, g);
  c.check("Tawn/EVI(0,1) K1", tw.k1_scalar(), -0.16667, 1e-3);
  c.check("Tawn/EVI(0,1) K2", tw.k2_scalar(), -0.06667, 1e-3);
  const DecayConstants ga = k_constants(Family::gaussian, nrm, nrm, g);
  c.check("Gaussian/N(0,1) K1", ga.k1_scalar(), 1.0, 1e-3);
  c.check("Gaussian/N(0,1) K2", ga.k2_scalar(), 0.0, 1e-3);
  const DecayConstants mx = k_constants(Family::mix3, tri, tri, g);
  c.check("Mix3/Triangular(0,1) K1 gamma", mx.k1[0], 0.01778, 1e-3);
  c.check("Mix3/Triangular(0,1) K1 alpha", mx.k1[1], -0.28366, 1e-3);
  c.note("independent closed forms: Gumbel-Barnett K1 = -1, Tawn K1 = 1 and K2 = 1/6,");
  c.note("Mix3 K1 alpha = 4/9 - pi/8 = " + fmt(4.0 / 9.0 - std::numbers::pi / 8));
  return c.finish();
}

bool criterion2() {
  Criterion c("2 Hoeffding covariance oracles");
  const QuadratureGrid g = QuadratureGrid::gauss_legendre(128);
  const Marginal evi = Marginal::evi(0, 1);
  for (double t : {0.1, 0.5, 1.0})
    c.check("FGM theta=" + fmt(t) + " EVI(0,1)", hoeffding_cov(CopulaSpec(Family::fgm, t), evi, evi, g), kLn2Sq * t,
            1e-6);
  const Marginal nrm = Marginal::normal(0, 1);
  for (double r : {-0.9, 0.5})
    c.check("Gaussian rho=" + fmt(r) + " N(0,1)", hoeffding_cov(CopulaSpec(Family::gaussian, r), nrm, nrm, g), r,
            1e-4);
  return c.finish();
}

bool criterion3() {
  Criterion c("3 ARFIMA schedule asymptotics at n = 1e4");
  const long long n = 10000;
  for (double d : {0.1, 0.3, 0.45}) {
    const double rho = schedule_value(DecaySchedule(ArfimaD{d}), n);
    const double ratio = rho * gamma_fn(d) / (gamma_fn(1 - d) * std::pow(static_cast<double>(n), 2 * d - 1));
    c.check("d=" + fmt(d) + " ratio", ratio, 1.0, 0.01);
  }
  return c.finish();
}

ExperimentConfig desk_config(Model model, std::vector<double> params, std::vector<std::size_t> m,
                             std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.params = std::move(params);
  cfg.m = std::move(m);
  cfg.n = kN;
  cfg.replications = kReps;
  cfg.seed = seed;
  return cfg;
}

bool criterion4() {
  Criterion c("4 MA(1) and AR(1) table, 200 replications, n = 1000");
  const std::vector<double> grid{-0.9, -0.5, -0.1, 0.1, 0.5, 0.9};
  const std::vector<double> ar_paper{-0.8989, -0.5011, -0.1012, 0.0973, 0.4970, 0.8971};
  const std::vector<double> ma_paper{-0.8777, -0.5063, -0.1014, 0.0990, 0.5048, 0.8739};
  try {
    const McTable ar = run_experiment(desk_config(Model::ar1, grid, {1}, 61));
    const McTable ma = run_experiment(desk_config(Model::ma1, grid, {1}, 62));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const McRow& r = ar.row(grid[i], 1, "phi");
      c.check("AR1 phi=" + fmt(grid[i]) + " mean (mse " + fmt(r.mse) + ")", r.mean, ar_paper[i], 0.015);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const McRow& r = ma.row(grid[i], 1, "theta");
      const double tol = std::abs(grid[i]) > 0.5 ? 0.04 : 0.02;
      c.check("MA1 theta=" + fmt(grid[i]) + " mean (mse " + fmt(r.mse) + ")", r.mean, ma_paper[i], tol);
    }
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

bool criterion5() {
  Criterion c("5 ARFIMA(0,d,0) table, 200 replications, n = 1000");
  try {
    const McTable t = run_experiment(desk_config(Model::arfima, {0.1, 0.3, 0.4, 0.45}, {5, 10, 25}, 63));
    c.check("canonical d=0.1 m=25", t.row(0.1, 25, "d_can").mean, 0.0986, 0.02);
    c.check("canonical d=0.3 m=25", t.row(0.3, 25, "d_can").mean, 0.2664, 0.02);
    c.check("corrected d=0.1 m=25", t.row(0.1, 25, "d_cor").mean, 0.1047, 0.02);
    c.check("corrected d=0.45 m=5", t.row(0.45, 5, "d_cor").mean, 0.4468, 0.03);
    for (double d : {0.3, 0.4, 0.45})
      for (std::size_t m : {5u, 10u, 25u}) {
        const double bc = std::abs(t.row(d, m, "d_can").mean - d);
        const double br = std::abs(t.row(d, m, "d_cor").mean - d);
        c.require("d=" + fmt(d) + " m=" + std::to_string(m) + " |bias| corrected " + fmt(br) + " < canonical " +
                      fmt(bc),
                  br < bc);
      }
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

// Oracle for the n-dimensional construction: the literal sum of bivariate
// FGM copulas times the remaining coordinates, minus the product correction.
double construction_cdf(const std::vector<double>& u, double alpha, double kappa0) {
  const std::size_t n = u.size();
  double prod_all = 1.0;
  for (double x : u) prod_all *= x;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double theta = std::pow(static_cast<double>(j - i), -alpha) / kappa0;
      double rest = 1.0;
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) rest *= u[k];
      total += u[i] * u[j] * (1.0 + theta * (1.0 - u[i]) * (1.0 - u[j])) * rest;
    }
  return total - static_cast<double>((n - 2) * (n + 1)) / 2.0 * prod_all;
}

bool criterion6() {
  Criterion c("6 FGM construction properties");
  try {
    // (a) density against the numeric third mixed partial of the cdf
    {
      const double alpha = 2.0;
      const double kappa0 = fgm_min_kappa(3, alpha);
      const DecaySchedule s(FgmPower{alpha, kappa0});
      const double h = 1e-2;
      double worst = 0.0;
      for (double a : {0.1, 0.35, 0.6, 0.85})
        for (double b : {0.1, 0.35, 0.6, 0.85})
          for (double d : {0.1, 0.35, 0.6, 0.85}) {
            double numeric = 0.0;
            for (int sa : {-1, 1})
              for (int sb : {-1, 1})
                for (int sd : {-1, 1})
                  numeric += sa * sb * sd * construction_cdf({a + sa * h, b + sb * h, d + sd * h}, alpha, kappa0);
            numeric /= 8.0 * h * h * h;
            worst = std::max(worst, std::abs(numeric - fgm_density(s, {a, b, d})));
          }
      c.check("n=3 density vs mixed partial, max error", worst, 0.0, 1e-6);
    }
    // (b) binned pairwise density of the sampler
    {
      const std::size_t draws = 100000;
      const double alpha = 2.0;
      const double kappa0 = fgm_min_kappa(3, alpha);
      const Marginal evi = Marginal::evi(0, 1);
      PathConfig pc;
      pc.n = 3;
      pc.schedule = DecaySchedule(FgmPower{alpha, kappa0});
      pc.marginal = evi;
      std::vector<std::vector<double>> cnt1(10, std::vector<double>(10, 0.0));
      std::vector<std::vector<double>> cnt2 = cnt1;
      for (std::size_t r = 0; r < draws; ++r) {
        pc.seed = derive_seed(606, r);
        const SeriesPath p = fgm_path(pc);
        std::size_t bin[3];
        for (int k = 0; k < 3; ++k) bin[k] = std::min<std::size_t>(9, static_cast<std::size_t>(evi.cdf(p.values[k]) * 10));
        cnt1[bin[0]][bin[1]] += 1;
        cnt2[bin[0]][bin[2]] += 1;
      }
      double worst = 0.0;
      for (int lag : {1, 2}) {
        const double theta = std::pow(lag, -alpha) / kappa0;
        const auto& cnt = lag == 1 ? cnt1 : cnt2;
        for (int i = 0; i < 10; ++i)
          for (int j = 0; j < 10; ++j) {
            auto w = [](int k) { const double lo = k / 10.0, hi = (k + 1) / 10.0; return (hi - hi * hi) - (lo - lo * lo); };
            const double p = 0.01 + theta * w(i) * w(j);
            const double se = std::sqrt(draws * p * (1 - p));
            worst = std::max(worst, std::abs(cnt[i][j] - draws * p) / se);
          }
      }
      c.check("10x10 binned density, max |z| over lags 1,2", worst, 0.0, 4.0);
    }
    // (c) covariance ratio decay
    {
      const std::size_t reps = 10000;
      const std::size_t n = 50;
      const double alpha = 1.5;
      const double kappa0 = fgm_min_kappa(n, alpha);
      const double b = std::numbers::ln2 / std::sqrt(kappa0);
      const Marginal f = Marginal::evi(0, b);
      const double mean = b * std::numbers::egamma;
      const std::vector<std::size_t> lags{1, 2, 3, 5};
      std::vector<std::vector<double>> s(lags.size(), std::vector<double>(reps));
      PathConfig pc;
      pc.n = n;
      pc.schedule = DecaySchedule(FgmPower{alpha, kappa0});
      pc.marginal = f;
      for (std::size_t r = 0; r < reps; ++r) {
        pc.seed = derive_seed(707, r);
        const auto x = fgm_path(pc).values;
        for (std::size_t li = 0; li < lags.size(); ++li) {
          double acc = 0.0;
          for (std::size_t t = 0; t + lags[li] < n; ++t) acc += (x[t] - mean) * (x[t + lags[li]] - mean);
          s[li][r] = acc / static_cast<double>(n - lags[li]);
        }
      }
      auto avg = [&](const std::vector<double>& v) {
        double a = 0.0;
        for (double x : v) a += x;
        return a / static_cast<double>(v.size());
      };
      const double m1 = avg(s[0]);
      c.note("lag-1 covariance " + fmt(m1) + ", Hoeffding value " + fmt(kLn2Sq * b * b / kappa0));
      for (std::size_t li = 1; li < lags.size(); ++li) {
        const double mh = avg(s[li]);
        const double ratio = mh / m1;
        // delta-method standard error over independent replicates
        double v11 = 0.0, vhh = 0.0, v1h = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          v11 += (s[0][r] - m1) * (s[0][r] - m1);
          vhh += (s[li][r] - mh) * (s[li][r] - mh);
          v1h += (s[0][r] - m1) * (s[li][r] - mh);
        }
        const double nn = static_cast<double>(reps);
        v11 /= nn * (nn - 1);
        vhh /= nn * (nn - 1);
        v1h /= nn * (nn - 1);
        const double se = std::abs(ratio) * std::sqrt(vhh / (mh * mh) + v11 / (m1 * m1) - 2 * v1h / (m1 * mh));
        c.check("cov(h)/cov(1) h=" + std::to_string(lags[li]) + " (3 SE)", ratio,
                std::pow(static_cast<double>(lags[li]), -alpha), 3 * se);
      }
    }
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion7() {
  Criterion c("7 mc-table outputs identical across thread counts 1 and 4");
  try {
    const fs::path base = fs::temp_directory_path() / "covdecay_acceptance_threads";
    fs::remove_all(base);
    std::string tables[2];
    std::string records[2];
    for (int k = 0; k < 2; ++k) {
      ExperimentConfig cfg = desk_config(Model::arfima, {0.2, 0.4}, {5, 10}, 64);
      cfg.replications = 40;
      cfg.threads = k == 0 ? 1 : 4;
      cfg.output = (base / std::to_string(cfg.threads)).string();
      run_experiment(cfg);
      tables[k] = slurp(fs::path(cfg.output) / "table.csv");
      records[k] = slurp(fs::path(cfg.output) / "replications.csv");
    }
    c.require("table.csv byte-identical", !tables[0].empty() && tables[0] == tables[1]);
    c.require("replications.csv byte-identical", !records[0].empty() && records[0] == records[1]);
    fs::remove_all(base);
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

bool criterion8() {
  Criterion c("8 stationary bootstrap");
  try {
    Rng rng(808);
    for (double mb : {50.0, 1000.0}) {
      double sum = 0.0;
      for (int i = 0; i < 100000; ++i) sum += static_cast<double>(geometric_block_length(rng, mb));
      c.check("block length mean, configured " + fmt(mb), sum / 100000.0, mb, 0.05 * mb);
    }
    const std::size_t n = 10000;
    int covered = 0;
    const Statistic mean = [](const std::vector<double>& v) {
      double a = 0.0;
      for (double x : v) a += x;
      return a / static_cast<double>(v.size());
    };
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      Rng g(derive_seed(809, trial));
      std::vector<double> x(n);
      for (double& v : x) v = g.normal();
      const BootstrapResult b = stationary_bootstrap(x, mean, 50.0, 200, derive_seed(810, trial));
      covered += b.lo95 <= 0.0 && 0.0 <= b.hi95;
    }
    c.require("95% interval covers the mean in " + std::to_string(covered) + " of 100 trials (>= 90)", covered >= 90);
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

bool self_consistency() {
  Criterion c("analyze self-consistency: simulated ARFIMA(0.3), Exp marginal");
  try {
    PathConfig pc;
    pc.n = 3000;
    pc.schedule = DecaySchedule(ArfimaD{0.3});
    pc.marginal = Marginal::exponential_scale(1);
    pc.seed = 911;
    const fs::path file = fs::temp_directory_path() / "covdecay_acceptance_series.csv";
    {
      std::ofstream out(file);
      out << series_to_csv(gaussian_path(pc).values);
    }
    AnalyzeOptions opt;
    opt.input = InputKind::series;
    opt.marginal = MarginalFit::exponential;
    opt.m = 25;
    const AnalyzeResult r = analyze_file(file.string(), opt);
    fs::remove(file);
    c.check("beta_cor", r.report.beta_cor->value, 0.4, 0.05);
    c.note("beta_can " + fmt(r.report.beta_can->value) + ", beta_g " + fmt(r.report.beta_g->value));
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return c.finish();
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, self_consistency};
  int failed = 0;
  for (const auto& f : all) failed += f() ? 0 : 1;
  std::printf("%d of %zu criteria failed\n", failed, all.size());
  return failed;
}
