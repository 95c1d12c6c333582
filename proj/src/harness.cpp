#include "projwass/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <utility>

#include "projwass/errors.hpp"
#include "projwass/iprw.hpp"

namespace projwass {

namespace {

using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_draws_csv(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << std::setprecision(17) << "value\n";
  for (double v : values) out << v << "\n";
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  const int n = static_cast<int>(sorted.size());
  int idx = static_cast<int>(std::ceil(level * n));
  idx = std::clamp(idx, 1, n);
  return sorted[static_cast<std::size_t>(idx - 1)];
}

void write_qq_csv(const std::string& path, std::vector<double> finite, std::vector<double> limit, int levels = 200) {
  std::sort(finite.begin(), finite.end());
  std::sort(limit.begin(), limit.end());
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << std::setprecision(17) << "finite_quantile,limit_quantile\n";
  for (int i = 1; i <= levels; ++i) {
    const double level = (i - 0.5) / levels;
    out << quantile_sorted(finite, level) << "," << quantile_sorted(limit, level) << "\n";
  }
}

json config_json(const ExperimentConfig& cfg) {
  json rules = json::array();
  for (EllRule r : cfg.test_rules) rules.push_back(ell_rule_name(r));
  return json{{"protocol", cfg.protocol}, {"reps", cfg.reps},       {"draws", cfg.draws},
              {"frames", cfg.frames},     {"L", cfg.L},             {"M", cfg.M},
              {"n_list", cfg.n_list},     {"n", cfg.n},             {"p", cfg.p},
              {"lambda", cfg.lambda},     {"k", cfg.k},             {"delta", cfg.delta},
              {"alpha", cfg.alpha},       {"B", cfg.B},             {"runs", cfg.runs},
              {"trials", cfg.trials},     {"restarts", cfg.restarts}, {"test_rules", rules},
              {"seed", cfg.seed}};
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct ReportBuilder {
  explicit ReportBuilder(const ExperimentConfig& c) : cfg(c) {}

  ExperimentConfig cfg;
  json results = json::object();
  std::vector<std::string> artifacts;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  bool writing() const { return !cfg.out_dir.empty(); }

  std::string artifact_path(const std::string& name) {
    artifacts.push_back(name);
    return join_path(cfg.out_dir, name);
  }

  ReportDocument finish() {
    const json config = config_json(cfg);
    const double secs =
        std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - start).count();
    ReportDocument doc;
    doc.content = json{{"schema_version", 1},
                       {"command", "experiment"},
                       {"protocol", cfg.protocol},
                       {"config", config},
                       {"config_hash", hash_hex(fnv1a_hash(config.dump()))},
                       {"seed", cfg.seed},
                       {"timing_seconds", secs},
                       {"results", results},
                       {"artifacts", artifacts}};
    if (writing()) {
      std::ofstream out(join_path(cfg.out_dir, "report.json"));
      if (!out) throw input_error("cannot write report.json under " + cfg.out_dir);
      out << doc.content.dump(2) << "\n";
    }
    return doc;
  }
};

// RNG stream tags so that weights, frames, limit draws, and data draws never
// overlap across protocols
constexpr std::uint64_t kTagWeightsA = 11, kTagWeightsB = 12, kTagFrames = 13, kTagLimit = 14, kTagData = 15,
                        kTagSolver = 16, kTagTrial = 17, kTagRun = 18;

ReportDocument iprw_convergence(const ExperimentConfig& cfg, bool null_regime) {
  const GroundSpace space = grid_ground_space(cfg.L);
  const Rng root(cfg.seed);
  const ProbVector r = dirichlet_flat(space.N(), root.fold(kTagWeightsA));
  const ProbVector s = null_regime ? r : dirichlet_flat(space.N(), root.fold(kTagWeightsB));
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(space.d(), cfg.k, cfg.frames, root.fold(kTagFrames));

  double iw_true = 0.0;
  LimitSampleSet limit;
  if (null_regime) {
    limit = iprw_null_limit_sampler(r, space, cfg.p, proj, cfg.draws, root.fold(kTagLimit));
  } else {
    iw_true = iprw_distance(r, s, space, cfg.p, proj).value;
    limit = iprw_alt_limit_sampler(r, s, space, cfg.p, proj, cfg.delta, cfg.draws, root.fold(kTagLimit));
  }

  ReportBuilder rb(cfg);
  if (rb.writing()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_draws_csv(rb.artifact_path("limit_draws.csv"), limit.draws);
  }

  json ks_rows = json::array();
  std::ofstream ks_csv;
  if (rb.writing()) {
    ks_csv.open(rb.artifact_path("ks_vs_n.csv"));
    ks_csv << std::setprecision(17) << "n,ks\n";
  }
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    std::vector<double> stats(static_cast<std::size_t>(cfg.reps));
    const double rate = static_cast<double>(n) * n / (2.0 * n);
    const double scale = std::pow(rate, limit.scaling_exponent);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      Rng rr = root.fold(kTagData).fold(ni).fold(static_cast<std::uint64_t>(rep));
      const ProbVector rn = empirical_distribution(draw_sample(r, n, rr), space);
      const ProbVector sn = empirical_distribution(draw_sample(s, n, rr), space);
      const double iw = iprw_distance(rn, sn, space, cfg.p, proj).value;
      stats[static_cast<std::size_t>(rep)] = scale * (iw - iw_true);
    }
    const double ks = ks_distance(stats, limit.draws);
    ks_rows.push_back(json{{"n", n}, {"ks", ks}});
    if (rb.writing()) {
      ks_csv << n << "," << ks << "\n";
      write_draws_csv(rb.artifact_path("finite_draws_n" + std::to_string(n) + ".csv"), stats);
      write_qq_csv(rb.artifact_path("qq_n" + std::to_string(n) + ".csv"), stats, limit.draws);
    }
  }
  rb.results = json{{"ks", ks_rows}, {"regime", null_regime ? "null" : "alternative"}};
  if (!null_regime) rb.results["iw_true"] = iw_true;
  return rb.finish();
}

ReportDocument prw_convergence(const ExperimentConfig& cfg) {
  const GroundSpace space = mspace_ground_space(cfg.M);
  const Rng root(cfg.seed);
  const ProbVector r = dirichlet_flat(space.N(), root.fold(kTagWeightsA));
  const ProbVector s = dirichlet_flat(space.N(), root.fold(kTagWeightsB));

  PrwOptions popts;
  popts.restarts = cfg.restarts;
  {
    Rng t = root.fold(kTagSolver);
    popts.seed = t.next_u64();
  }
  const PrwSolution sol = prw_regularized(r, s, space, cfg.p, cfg.lambda, cfg.k, popts);
  const ArgmaxSet psi = argmax_set(sol);
  const LimitSampleSet limit =
      prw_limit_sampler(r, s, space, cfg.p, cfg.lambda, psi, cfg.delta, cfg.draws, root.fold(kTagLimit));

  ReportBuilder rb(cfg);
  if (rb.writing()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_draws_csv(rb.artifact_path("limit_draws.csv"), limit.draws);
  }

  json ks_rows = json::array();
  std::ofstream ks_csv;
  if (rb.writing()) {
    ks_csv.open(rb.artifact_path("ks_vs_n.csv"));
    ks_csv << std::setprecision(17) << "n,ks\n";
  }
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    std::vector<double> stats(static_cast<std::size_t>(cfg.reps));
    const double scale = std::sqrt(static_cast<double>(n) / 2.0);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      Rng rr = root.fold(kTagData).fold(ni).fold(static_cast<std::uint64_t>(rep));
      const ProbVector rn = empirical_distribution(draw_sample(r, n, rr), space);
      const ProbVector sn = empirical_distribution(draw_sample(s, n, rr), space);
      const double pw = prw_regularized(rn, sn, space, cfg.p, cfg.lambda, cfg.k, popts).value;
      stats[static_cast<std::size_t>(rep)] = scale * (pw - sol.value);
    }
    const double ks = ks_distance(stats, limit.draws);
    ks_rows.push_back(json{{"n", n}, {"ks", ks}});
    if (rb.writing()) {
      ks_csv << n << "," << ks << "\n";
      write_draws_csv(rb.artifact_path("finite_draws_n" + std::to_string(n) + ".csv"), stats);
      write_qq_csv(rb.artifact_path("qq_n" + std::to_string(n) + ".csv"), stats, limit.draws);
    }
  }
  rb.results = json{{"ks", ks_rows}, {"pw_true", sol.value}, {"argmax_modes", psi.frames.size()}};
  return rb.finish();
}

ReportDocument bootstrap_compare(const ExperimentConfig& cfg) {
  const GroundSpace space = grid_ground_space(cfg.L);
  const Rng root(cfg.seed);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(space.d(), cfg.k, cfg.frames, root.fold(kTagFrames));
  const std::vector<EllRule> rules = {EllRule::naive_n, EllRule::n_four_fifths, EllRule::n_two_thirds,
                                      EllRule::n_half};
  const auto statistic = [&](const ProbVector& a, const ProbVector& b) {
    return iprw_distance(a, b, space, cfg.p, proj).value;
  };

  ReportBuilder rb(cfg);
  if (rb.writing()) std::filesystem::create_directories(cfg.out_dir);

  json ks_rows = json::array();
  std::ofstream ks_csv;
  if (rb.writing()) {
    ks_csv.open(rb.artifact_path("ks_table.csv"));
    ks_csv << std::setprecision(17) << "trial,rule,ks\n";
  }
  int naive_worse = 0;
  const double scale = std::sqrt(static_cast<double>(cfg.n) / 2.0);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const Rng tr = root.fold(kTagTrial).fold(static_cast<std::uint64_t>(trial));
    const ProbVector r = dirichlet_flat(space.N(), tr.fold(0));

    std::vector<double> finite(static_cast<std::size_t>(cfg.reps));
    for (int rep = 0; rep < cfg.reps; ++rep) {
      Rng rr = tr.fold(1).fold(static_cast<std::uint64_t>(rep));
      const ProbVector rn = empirical_distribution(draw_sample(r, cfg.n, rr), space);
      const ProbVector sn = empirical_distribution(draw_sample(r, cfg.n, rr), space);
      finite[static_cast<std::size_t>(rep)] = scale * statistic(rn, sn);
    }

    Rng dr = tr.fold(2);
    const std::vector<int> x = draw_sample(r, cfg.n, dr);
    const std::vector<int> y = draw_sample(r, cfg.n, dr);

    std::map<std::string, double> ks_by_rule;
    for (std::size_t ri = 0; ri < rules.size(); ++ri) {
      BootstrapConfig bc;
      bc.rule = rules[ri];
      bc.B = cfg.B;
      {
        Rng t = tr.fold(3).fold(ri);
        bc.seed = t.next_u64();
      }
      const std::vector<double> reps = rescaled_bootstrap(statistic, x, y, space, bc);
      const double ks = ks_distance(reps, finite);
      ks_by_rule[ell_rule_name(rules[ri])] = ks;
      ks_rows.push_back(json{{"trial", trial}, {"rule", ell_rule_name(rules[ri])}, {"ks", ks}});
      if (rb.writing()) {
        ks_csv << trial << "," << ell_rule_name(rules[ri]) << "," << ks << "\n";
        if (trial == 0) {
          write_draws_csv(rb.artifact_path("bootstrap_draws_trial0_" + ell_rule_name(rules[ri]) + ".csv"), reps);
        }
      }
    }
    if (ks_by_rule[ell_rule_name(EllRule::naive_n)] > ks_by_rule[ell_rule_name(EllRule::n_two_thirds)]) {
      ++naive_worse;
    }
    if (rb.writing() && trial == 0) {
      write_draws_csv(rb.artifact_path("finite_draws_trial0.csv"), finite);
      const LimitSampleSet limit = iprw_null_limit_sampler(r, space, cfg.p, proj, cfg.draws, tr.fold(4));
      write_draws_csv(rb.artifact_path("limit_draws_trial0.csv"), limit.draws);
    }
  }
  rb.results = json{{"ks", ks_rows}, {"naive_worse_than_n23", naive_worse}, {"trials", cfg.trials}};
  return rb.finish();
}

ReportDocument test_level_power(const ExperimentConfig& cfg) {
  const GroundSpace space = grid_ground_space(cfg.L);
  const Rng root(cfg.seed);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(space.d(), cfg.k, cfg.frames, root.fold(kTagFrames));

  ReportBuilder rb(cfg);
  if (rb.writing()) std::filesystem::create_directories(cfg.out_dir);
  std::ofstream run_csv;
  if (rb.writing()) {
    run_csv.open(rb.artifact_path("runs.csv"));
    run_csv << std::setprecision(17) << "rule,regime,run,statistic,critical_value,p_value,reject\n";
  }

  json rate_rows = json::array();
  for (std::size_t ri = 0; ri < cfg.test_rules.size(); ++ri) {
    const EllRule rule = cfg.test_rules[ri];
    int null_rejects = 0, alt_rejects = 0;
    for (int run = 0; run < cfg.runs; ++run) {
      const Rng rr = root.fold(kTagRun).fold(ri).fold(static_cast<std::uint64_t>(run));

      BootstrapConfig bc;
      bc.rule = rule;
      bc.B = cfg.B;

      const ProbVector r = dirichlet_flat(space.N(), rr.fold(0));
      Rng da = rr.fold(1);
      const std::vector<int> x = draw_sample(r, cfg.n, da);
      const std::vector<int> y = draw_sample(r, cfg.n, da);
      {
        Rng t = rr.fold(2);
        bc.seed = t.next_u64();
      }
      const TestReport null_report = sliced_two_sample_test(x, y, space, cfg.p, proj, cfg.alpha, bc);
      null_rejects += null_report.reject ? 1 : 0;

      const ProbVector r2 = dirichlet_flat(space.N(), rr.fold(3));
      const ProbVector s2 = dirichlet_flat(space.N(), rr.fold(4));
      Rng db = rr.fold(5);
      const std::vector<int> x2 = draw_sample(r2, cfg.n, db);
      const std::vector<int> y2 = draw_sample(s2, cfg.n, db);
      {
        Rng t = rr.fold(6);
        bc.seed = t.next_u64();
      }
      const TestReport alt_report = sliced_two_sample_test(x2, y2, space, cfg.p, proj, cfg.alpha, bc);
      alt_rejects += alt_report.reject ? 1 : 0;

      if (rb.writing()) {
        run_csv << ell_rule_name(rule) << ",null," << run << "," << null_report.statistic << ","
                << null_report.critical_value << "," << null_report.p_value << "," << (null_report.reject ? 1 : 0)
                << "\n";
        run_csv << ell_rule_name(rule) << ",alternative," << run << "," << alt_report.statistic << ","
                << alt_report.critical_value << "," << alt_report.p_value << "," << (alt_report.reject ? 1 : 0)
                << "\n";
      }
    }
    rate_rows.push_back(json{{"rule", ell_rule_name(rule)},
                             {"level_rate", static_cast<double>(null_rejects) / cfg.runs},
                             {"power_rate", static_cast<double>(alt_rejects) / cfg.runs},
                             {"runs", cfg.runs}});
  }
  rb.results = json{{"rejection_rates", rate_rows}, {"alpha", cfg.alpha}};
  return rb.finish();
}

}  // namespace

GroundSpace grid_ground_space(int L) {
  if (L < 2) throw input_error("grid needs L >= 2");
  Eigen::MatrixXd pts(2, L * L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      pts(0, i * L + j) = static_cast<double>(i) / (L - 1);
      pts(1, i * L + j) = static_cast<double>(j) / (L - 1);
    }
  }
  return GroundSpace::checked(std::move(pts));
}

GroundSpace mspace_ground_space(int M) {
  if (M < 1) throw input_error("layout needs M >= 1");
  Eigen::MatrixXd pts(3, 4 * M);
  int c = 0;
  for (int t = 1; t <= M; ++t) {
    for (double e1 : {-0.001, 0.001}) {
      for (double e2 : {-0.001, 0.001}) {
        pts(0, c) = static_cast<double>(t) / M;
        pts(1, c) = e1;
        pts(2, c) = e2;
        ++c;
      }
    }
  }
  return GroundSpace::checked(std::move(pts));
}

std::vector<int> draw_sample(const ProbVector& w, int count, Rng& rng) {
  if (count < 1) throw input_error("sample count must be >= 1");
  std::vector<double> cum(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    acc += w.w[i];
    cum[static_cast<std::size_t>(i)] = acc;
  }
  cum.back() = std::max(cum.back(), 1.0);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = rng.categorical(cum) + 1;
  return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw input_error("ks distance needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i < a.size() && j < b.size()) {
      v = std::min(a[i], b[j]);
    } else if (i < a.size()) {
      v = a[i];
    } else {
      v = b[j];
    }
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ell_rule_name(EllRule rule) {
  switch (rule) {
    case EllRule::naive_n:
      return "n";
    case EllRule::n_four_fifths:
      return "n45";
    case EllRule::n_two_thirds:
      return "n23";
    case EllRule::n_half:
      return "n12";
    case EllRule::explicit_ell:
      return "explicit";
  }
  return "unknown";
}

EllRule parse_ell_rule(const std::string& name) {
  if (name == "n") return EllRule::naive_n;
  if (name == "n45") return EllRule::n_four_fifths;
  if (name == "n23") return EllRule::n_two_thirds;
  if (name == "n12") return EllRule::n_half;
  if (name == "explicit") return EllRule::explicit_ell;
  throw input_error("unknown replacement rule '" + name + "' (expected n, n45, n23, n12, or explicit)");
}

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw input_error("cannot parse " + path + ": " + e.what());
  }
}

std::pair<GroundSpace, ProbVector> parse_histogram(const nlohmann::json& doc, const std::string& origin) {
  if (!doc.is_object() || !doc.contains("points") || !doc.contains("weights")) {
    throw input_error(origin + ": histogram must be an object with points and weights");
  }
  const auto& pts = doc.at("points");
  const auto& ws = doc.at("weights");
  if (!pts.is_array() || pts.empty() || !ws.is_array() || ws.size() != pts.size()) {
    throw input_error(origin + ": points and weights must be equal-length nonempty arrays");
  }
  const int N = static_cast<int>(pts.size());
  if (!pts[0].is_array() || pts[0].empty()) throw input_error(origin + ": each point must be an array of reals");
  const int d = static_cast<int>(pts[0].size());
  Eigen::MatrixXd points(d, N);
  for (int c = 0; c < N; ++c) {
    const auto& row = pts[static_cast<std::size_t>(c)];
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw input_error(origin + ": points must all have the same dimension");
    }
    for (int a = 0; a < d; ++a) {
      if (!row[static_cast<std::size_t>(a)].is_number()) throw input_error(origin + ": point entries must be numbers");
      points(a, c) = row[static_cast<std::size_t>(a)].get<double>();
    }
  }
  Eigen::VectorXd w(N);
  for (int c = 0; c < N; ++c) {
    if (!ws[static_cast<std::size_t>(c)].is_number()) throw input_error(origin + ": weights must be numbers");
    w[c] = ws[static_cast<std::size_t>(c)].get<double>();
  }
  const double sum = w.sum();
  if (std::abs(sum - 1.0) > 1e-6) throw input_error(origin + ": weights must sum to 1 within 1e-6");
  if (std::abs(sum - 1.0) > 1e-12) w /= sum;
  return {GroundSpace::checked(std::move(points)), ProbVector::checked(std::move(w))};
}

std::vector<Eigen::VectorXd> parse_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  int d = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        vals.push_back(v);
      } catch (const std::exception&) {
        throw input_error(path + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "' as a number");
      }
    }
    if (vals.empty()) continue;
    if (d == -1) {
      d = static_cast<int>(vals.size());
    } else if (static_cast<int>(vals.size()) != d) {
      throw input_error(path + ":" + std::to_string(lineno) + ": ragged row (expected " + std::to_string(d) +
                        " columns)");
    }
    rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  if (rows.empty()) throw input_error(path + ": no data rows");
  return rows;
}

}  // namespace

IngestResult ingest(const DatasetSpec& spec) {
  IngestResult out;
  switch (spec.kind) {
    case DatasetSpec::Kind::histogram_json: {
      auto [space, w] = parse_histogram(load_json(spec.path), spec.path);
      out.space = std::move(space);
      out.weights = std::move(w);
      return out;
    }
    case DatasetSpec::Kind::synthetic_grid: {
      out.space = grid_ground_space(spec.L);
      out.weights = dirichlet_flat(out.space.N(), Rng(spec.weights_seed));
      return out;
    }
    case DatasetSpec::Kind::synthetic_mspace: {
      out.space = mspace_ground_space(spec.M);
      out.weights = dirichlet_flat(out.space.N(), Rng(spec.weights_seed));
      return out;
    }
    case DatasetSpec::Kind::samples_csv: {
      const std::vector<Eigen::VectorXd> rows = parse_csv_rows(spec.path);
      std::vector<int> samples;
      samples.reserve(rows.size());
      if (spec.quantize_L > 0) {
        const int L = spec.quantize_L;
        out.space = grid_ground_space(L);
        for (const Eigen::VectorXd& row : rows) {
          if (row.size() != 2) throw input_error(spec.path + ": grid quantization needs 2 columns");
          const int qi = std::clamp(static_cast<int>(std::lround(row[0] * (L - 1))), 0, L - 1);
          const int qj = std::clamp(static_cast<int>(std::lround(row[1] * (L - 1))), 0, L - 1);
          samples.push_back(qi * L + qj + 1);
        }
      } else if (!spec.support_path.empty()) {
        auto [space, w] = parse_histogram(load_json(spec.support_path), spec.support_path);
        (void)w;
        out.space = std::move(space);
        for (const Eigen::VectorXd& row : rows) {
          if (row.size() != out.space.d()) {
            throw input_error(spec.path + ": rows must match the support dimension " +
                              std::to_string(out.space.d()));
          }
          int match = -1;
          for (int c = 0; c < out.space.N(); ++c) {
            if ((out.space.points.col(c) - row).cwiseAbs().maxCoeff() <= 1e-12) {
              match = c;
              break;
            }
          }
          if (match < 0) throw input_error(spec.path + ": observation outside the declared support");
          samples.push_back(match + 1);
        }
      } else {
        throw input_error("samples csv needs a declared support (support_path) or quantize_L");
      }
      out.samples = std::move(samples);
      return out;
    }
  }
  throw input_error("unknown dataset kind");
}

void emit_histogram(const std::string& path, const GroundSpace& space, const ProbVector& w) {
  if (w.size() != space.N()) throw input_error("weights must live on the given space");
  nlohmann::json pts = nlohmann::json::array();
  for (int c = 0; c < space.N(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < space.d(); ++a) row.push_back(space.points(a, c));
    pts.push_back(std::move(row));
  }
  nlohmann::json ws = nlohmann::json::array();
  for (int c = 0; c < w.size(); ++c) ws.push_back(w.w[c]);
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << nlohmann::json{{"points", std::move(pts)}, {"weights", std::move(ws)}}.dump(2) << "\n";
}

ReportDocument run_experiment(const ExperimentConfig& cfg) {
  if (cfg.reps < 1 || cfg.draws < 1 || cfg.frames < 1) {
    throw input_error("reps, draws, and frames must all be >= 1");
  }
  if (cfg.protocol == "iprw-null-convergence") return iprw_convergence(cfg, true);
  if (cfg.protocol == "iprw-alt-convergence") return iprw_convergence(cfg, false);
  if (cfg.protocol == "prw-convergence") return prw_convergence(cfg);
  if (cfg.protocol == "bootstrap-compare") return bootstrap_compare(cfg);
  if (cfg.protocol == "test-level-power") return test_level_power(cfg);
  throw input_error("unknown protocol '" + cfg.protocol +
                    "' (expected iprw-null-convergence, iprw-alt-convergence, prw-convergence, "
                    "bootstrap-compare, or test-level-power)");
}

}  // namespace projwass
