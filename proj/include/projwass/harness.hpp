#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "projwass/inference.hpp"
#include "projwass/measures.hpp"
#include "projwass/rng.hpp"

namespace projwass {

// Equidistant L x L grid on [0,1]^2, row-major: index i*L + j holds
// (i/(L-1), j/(L-1)).
GroundSpace grid_ground_space(int L);

// {1/M, ..., M/M} x {-0.001, 0.001} x {-0.001, 0.001} in R^3, N = 4M.
GroundSpace mspace_ground_space(int M);

// count i.i.d. draws from w as 1-based support indices
std::vector<int> draw_sample(const ProbVector& w, int count, Rng& rng);

// exact two-sample Kolmogorov-Smirnov statistic
double ks_distance(std::vector<double> a, std::vector<double> b);

struct DatasetSpec {
  enum class Kind { samples_csv, histogram_json, synthetic_grid, synthetic_mspace };
  Kind kind = Kind::histogram_json;
  std::string path;          // csv or json source
  std::string support_path;  // histogram json declaring the support for exact-match csv rows
  int quantize_L = 0;        // >0: quantize csv rows onto the L x L grid instead
  int L = 0;                 // synthetic grid size
  int M = 0;                 // synthetic low-dimensional layout size
  std::uint64_t weights_seed = 0;  // synthetic Dirichlet weights
};

struct IngestResult {
  GroundSpace space;
  std::optional<ProbVector> weights;
  std::optional<std::vector<int>> samples;  // 1-based support indices
};

IngestResult ingest(const DatasetSpec& spec);

// {"points": [[...]], "weights": [...]} with full double round-trip
void emit_histogram(const std::string& path, const GroundSpace& space, const ProbVector& w);

std::uint64_t fnv1a_hash(const std::string& text);

std::string ell_rule_name(EllRule rule);
EllRule parse_ell_rule(const std::string& name);  // n | n45 | n23 | n12 | explicit

struct ExperimentConfig {
  std::string protocol;  // iprw-null-convergence | iprw-alt-convergence | prw-convergence |
                         // bootstrap-compare | test-level-power
  int reps = 2000;       // finite-sample Monte Carlo repetitions
  int draws = 10000;     // limit-sampler draws
  int frames = 128;      // projection frame count
  int L = 3;             // grid protocols
  int M = 3;             // low-dimensional layout protocol
  std::vector<int> n_list = {25, 100, 1000};
  int n = 1000;  // single-n protocols
  double p = 1.0;
  double lambda = 1.0;
  int k = 1;
  double delta = 0.5;
  double alpha = 0.05;
  int B = 500;
  int runs = 200;    // test-level-power Monte Carlo runs per regime
  int trials = 20;   // bootstrap-compare trials
  int restarts = 10; // ascent restarts for the prw protocol
  std::vector<EllRule> test_rules = {EllRule::n_four_fifths, EllRule::n_two_thirds, EllRule::n_half};
  std::uint64_t seed = 0;
  std::string out_dir;  // nonempty: write report.json and plot-data CSVs here
};

struct ReportDocument {
  nlohmann::json content;
};

ReportDocument run_experiment(const ExperimentConfig& cfg);

}  // namespace projwass
