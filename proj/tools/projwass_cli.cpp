#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "projwass/errors.hpp"
#include "projwass/harness.hpp"
#include "projwass/inference.hpp"
#include "projwass/iprw.hpp"
#include "projwass/prw.hpp"

namespace {

using nlohmann::json;
using namespace projwass;

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_report(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

json stamped(const std::string& command, json config, json results) {
  const std::string canonical = config.dump();
  return json{{"schema_version", 1},
              {"command", command},
              {"config", std::move(config)},
              {"config_hash", hash_hex(fnv1a_hash(canonical))},
              {"results", std::move(results)}};
}

std::tuple<GroundSpace, ProbVector, ProbVector> load_histogram_pair(const std::string& a, const std::string& b) {
  DatasetSpec sa;
  sa.kind = DatasetSpec::Kind::histogram_json;
  sa.path = a;
  DatasetSpec sb = sa;
  sb.path = b;
  IngestResult ra = ingest(sa);
  IngestResult rb = ingest(sb);
  if (ra.space.N() != rb.space.N() || ra.space.d() != rb.space.d() ||
      (ra.space.points - rb.space.points).cwiseAbs().maxCoeff() > 1e-12) {
    throw input_error("the two histograms must declare the same support");
  }
  return {std::move(ra.space), std::move(*ra.weights), std::move(*rb.weights)};
}

std::pair<GroundSpace, std::pair<std::vector<int>, std::vector<int>>> load_sample_pair(const std::string& xa,
                                                                                       const std::string& xb,
                                                                                       const std::string& support,
                                                                                       int quantize_L) {
  if (support.empty() == (quantize_L == 0)) {
    throw input_error("samples need exactly one of --support or --quantize-L");
  }
  DatasetSpec da;
  da.kind = DatasetSpec::Kind::samples_csv;
  da.path = xa;
  da.support_path = support;
  da.quantize_L = quantize_L;
  DatasetSpec db = da;
  db.path = xb;
  IngestResult ia = ingest(da);
  IngestResult ib = ingest(db);
  return {std::move(ia.space), {std::move(*ia.samples), std::move(*ib.samples)}};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stoi(cell));
    } catch (const std::exception&) {
      throw input_error("cannot parse '" + cell + "' as an integer");
    }
  }
  if (out.empty()) throw input_error("empty integer list");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"projection-based Wasserstein distances: estimates, limit laws, tests, intervals, experiments"};
  app.require_subcommand(1);

  // shared flag storage
  std::string a_path, b_path, xa_path, xb_path, support_path, out_path, ell_rule = "n23", protocol, n_list_text,
              ell_rules_text;
  int quantize_L = 0, k = 1, frames = 128, B = 500, ell_explicit = 0, restarts = 10;
  double p = 1.0, lambda = 1.0, alpha = 0.05;
  std::uint64_t seed = 0;
  bool literal_uncentered = false;

  CLI::App* c_iprw = app.add_subcommand("iprw", "integral projection distance between two histograms");
  c_iprw->add_option("--a", a_path, "histogram JSON")->required();
  c_iprw->add_option("--b", b_path, "histogram JSON")->required();
  c_iprw->add_option("--p", p, "order of the distance (>= 1)");
  c_iprw->add_option("--k", k, "projection dimension");
  c_iprw->add_option("--frames", frames, "Monte Carlo frame count");
  c_iprw->add_option("--seed", seed, "RNG seed");
  c_iprw->add_option("--out", out_path, "report JSON path");

  CLI::App* c_prw = app.add_subcommand("prw", "regularized projection-robust distance between two histograms");
  c_prw->add_option("--a", a_path, "histogram JSON")->required();
  c_prw->add_option("--b", b_path, "histogram JSON")->required();
  c_prw->add_option("--p", p, "order of the distance (even integer)")->default_val(2.0);
  c_prw->add_option("--lambda", lambda, "entropic regularization weight");
  c_prw->add_option("--k", k, "projection dimension");
  c_prw->add_option("--restarts", restarts, "ascent restarts");
  c_prw->add_option("--seed", seed, "RNG seed");
  c_prw->add_option("--out", out_path, "report JSON path");

  CLI::App* c_test = app.add_subcommand("test", "two-sample equality test from raw samples");
  c_test->add_option("--xa", xa_path, "samples CSV (one observation per row)")->required();
  c_test->add_option("--xb", xb_path, "samples CSV")->required();
  c_test->add_option("--support", support_path, "histogram JSON declaring the support");
  c_test->add_option("--quantize-L", quantize_L, "quantize rows onto the L x L grid on [0,1]^2");
  c_test->add_option("--p", p, "order of the distance");
  c_test->add_option("--k", k, "projection dimension");
  c_test->add_option("--frames", frames, "Monte Carlo frame count");
  c_test->add_option("--ell-rule", ell_rule, "replacement rule: n, n45, n23, n12, explicit");
  c_test->add_option("--ell", ell_explicit, "replacement count for the explicit rule");
  c_test->add_option("--B", B, "bootstrap replicates");
  c_test->add_option("--alpha", alpha, "test level");
  c_test->add_option("--seed", seed, "RNG seed");
  c_test->add_option("--out", out_path, "report JSON path");

  CLI::App* c_ci = app.add_subcommand("ci", "bootstrap confidence interval for the regularized distance");
  c_ci->add_option("--xa", xa_path, "samples CSV")->required();
  c_ci->add_option("--xb", xb_path, "samples CSV")->required();
  c_ci->add_option("--support", support_path, "histogram JSON declaring the support");
  c_ci->add_option("--quantize-L", quantize_L, "quantize rows onto the L x L grid on [0,1]^2");
  c_ci->add_option("--p", p, "order of the distance (even integer)")->default_val(2.0);
  c_ci->add_option("--lambda", lambda, "entropic regularization weight");
  c_ci->add_option("--k", k, "projection dimension");
  c_ci->add_option("--ell-rule", ell_rule, "replacement rule: n, n45, n23, n12, explicit");
  c_ci->add_option("--ell", ell_explicit, "replacement count for the explicit rule");
  c_ci->add_option("--B", B, "bootstrap replicates");
  c_ci->add_option("--alpha", alpha, "1 - confidence level");
  c_ci->add_flag("--literal-uncentered", literal_uncentered, "raw replicate quantiles instead of centered ones");
  c_ci->add_option("--restarts", restarts, "ascent restarts");
  c_ci->add_option("--seed", seed, "RNG seed");
  c_ci->add_option("--out", out_path, "report JSON path");

  CLI::App* c_exp = app.add_subcommand("experiment", "run a named simulation protocol");
  ExperimentConfig cfg;
  c_exp->add_option("--protocol", protocol,
                    "iprw-null-convergence | iprw-alt-convergence | prw-convergence | bootstrap-compare | "
                    "test-level-power")
      ->required();
  c_exp->add_option("--reps", cfg.reps, "finite-sample Monte Carlo repetitions");
  c_exp->add_option("--draws", cfg.draws, "limit-sampler draws");
  c_exp->add_option("--frames", cfg.frames, "Monte Carlo frame count");
  c_exp->add_option("--L", cfg.L, "grid size");
  c_exp->add_option("--M", cfg.M, "low-dimensional layout size");
  c_exp->add_option("--n-list", n_list_text, "comma-separated sample sizes");
  c_exp->add_option("--n", cfg.n, "sample size for single-n protocols");
  CLI::Option* p_opt = c_exp->add_option("--p", cfg.p, "order of the distance");
  c_exp->add_option("--lambda", cfg.lambda, "entropic regularization weight");
  c_exp->add_option("--k", cfg.k, "projection dimension");
  c_exp->add_option("--delta", cfg.delta, "limit mixing proportion m/(n+m)");
  c_exp->add_option("--alpha", cfg.alpha, "test level");
  c_exp->add_option("--B", cfg.B, "bootstrap replicates");
  c_exp->add_option("--runs", cfg.runs, "test runs per regime");
  c_exp->add_option("--trials", cfg.trials, "bootstrap comparison trials");
  c_exp->add_option("--restarts", cfg.restarts, "ascent restarts");
  c_exp->add_option("--ell-rules", ell_rules_text, "comma-separated replacement rules for the test protocol");
  c_exp->add_option("--seed", cfg.seed, "RNG seed");
  c_exp->add_option("--out", cfg.out_dir, "output directory for report.json and plot CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the help text or the parse error
    return code == 0 ? 0 : 2;
  }

  std::cout << std::setprecision(12);

  if (app.got_subcommand(c_iprw)) {
    auto [space, wa, wb] = load_histogram_pair(a_path, b_path);
    const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(space.d(), k, frames, Rng(seed));
    const IprwEstimate est = iprw_distance(wa, wb, space, p, proj);
    std::cout << "iprw " << est.value << "\n";
    if (!out_path.empty()) {
      const json config{{"a", a_path}, {"b", b_path},         {"p", p},
                        {"k", k},      {"frames", frames},    {"seed", seed}};
      write_report(out_path, stamped("iprw", config, json{{"value", est.value}}));
    }
    return 0;
  }

  if (app.got_subcommand(c_prw)) {
    auto [space, wa, wb] = load_histogram_pair(a_path, b_path);
    PrwOptions opts;
    opts.restarts = restarts;
    opts.seed = seed;
    const PrwSolution sol = prw_regularized(wa, wb, space, p, lambda, k, opts);
    std::cout << "prw " << sol.value << "\n";
    if (!out_path.empty()) {
      const json config{{"a", a_path},           {"b", b_path}, {"p", p},       {"lambda", lambda},
                        {"k", k},                {"restarts", restarts}, {"seed", seed}};
      json cand = json::array();
      for (const PrwCandidate& c : sol.candidates) {
        cand.push_back(json{{"value", c.value}, {"iterations", c.iterations}, {"converged", c.converged}});
      }
      write_report(out_path, stamped("prw", config, json{{"value", sol.value}, {"candidates", cand}}));
    }
    return 0;
  }

  if (app.got_subcommand(c_test)) {
    auto [space, samples] = load_sample_pair(xa_path, xb_path, support_path, quantize_L);
    const Rng root(seed);
    const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(space.d(), k, frames, root.fold(1));
    BootstrapConfig bc;
    bc.rule = parse_ell_rule(ell_rule);
    bc.explicit_ell = ell_explicit;
    bc.B = B;
    {
      Rng t = root.fold(2);
      bc.seed = t.next_u64();
    }
    const TestReport rep = sliced_two_sample_test(samples.first, samples.second, space, p, proj, alpha, bc);
    std::cout << "statistic " << rep.statistic << "\ncritical_value " << rep.critical_value << "\np_value "
              << rep.p_value << "\nreject " << (rep.reject ? "true" : "false") << "\n";
    if (!rep.warning.empty()) std::cout << "warning " << rep.warning << "\n";
    if (!out_path.empty()) {
      const json config{{"xa", xa_path},     {"xb", xb_path}, {"support", support_path},
                        {"quantize_L", quantize_L}, {"p", p},        {"k", k},
                        {"frames", frames},  {"ell_rule", ell_rule}, {"ell", ell_explicit},
                        {"B", B},            {"alpha", alpha}, {"seed", seed}};
      const json results{{"statistic", rep.statistic},
                         {"critical_value", rep.critical_value},
                         {"p_value", rep.p_value},
                         {"reject", rep.reject},
                         {"ell", rep.ell},
                         {"warning", rep.warning}};
      write_report(out_path, stamped("test", config, results));
    }
    return 0;
  }

  if (app.got_subcommand(c_ci)) {
    auto [space, samples] = load_sample_pair(xa_path, xb_path, support_path, quantize_L);
    BootstrapConfig bc;
    bc.rule = parse_ell_rule(ell_rule);
    bc.explicit_ell = ell_explicit;
    bc.B = B;
    bc.literal_uncentered = literal_uncentered;
    const Rng root(seed);
    {
      Rng t = root.fold(2);
      bc.seed = t.next_u64();
    }
    PrwOptions opts;
    opts.restarts = restarts;
    {
      Rng t = root.fold(3);
      opts.seed = t.next_u64();
    }
    const ConfidenceInterval ci =
        prw_confidence_interval(samples.first, samples.second, space, p, lambda, k, alpha, bc, opts);
    std::cout << "point_estimate " << ci.point_estimate << "\ninterval [" << ci.lower << ", " << ci.upper
              << "]\nlevel " << ci.level << "\nmethod " << ci.method << "\n";
    if (!out_path.empty()) {
      const json config{{"xa", xa_path},     {"xb", xb_path}, {"support", support_path},
                        {"quantize_L", quantize_L}, {"p", p},        {"lambda", lambda},
                        {"k", k},            {"ell_rule", ell_rule}, {"ell", ell_explicit},
                        {"B", B},            {"alpha", alpha}, {"literal_uncentered", literal_uncentered},
                        {"restarts", restarts},     {"seed", seed}};
      const json results{{"lower", ci.lower},
                         {"upper", ci.upper},
                         {"level", ci.level},
                         {"point_estimate", ci.point_estimate},
                         {"method", ci.method}};
      write_report(out_path, stamped("ci", config, results));
    }
    return 0;
  }

  if (app.got_subcommand(c_exp)) {
    cfg.protocol = protocol;
    if (!n_list_text.empty()) cfg.n_list = parse_int_list(n_list_text);
    if (!ell_rules_text.empty()) {
      cfg.test_rules.clear();
      std::stringstream ss(ell_rules_text);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) cfg.test_rules.push_back(parse_ell_rule(cell));
      }
    }
    if (p_opt->count() == 0 && cfg.protocol == "prw-convergence") cfg.p = 2.0;
    const ReportDocument doc = run_experiment(cfg);
    std::cout << doc.content["results"].dump(2) << "\n";
    if (!cfg.out_dir.empty()) std::cout << "report written to " << cfg.out_dir << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const projwass::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const projwass::convergence_error& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
