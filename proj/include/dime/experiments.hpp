#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dime/network.hpp"
#include "dime/stats.hpp"
#include "dime/tasp.hpp"

namespace dime {

enum class ExperimentKind { quality, runtime_nodes, scale_k, scale_t, deviation, sensitivity };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& s);

struct GeneratorParams {
  std::size_t n = 60;
  std::size_t k = 6;
  double beta = 0.1;
  double p = 0.1;
  double u = 0.6;
  double uncertain_fraction = 0.3;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::quality;
  GeneratorParams generator;
  std::optional<std::string> network_file;  // used as is, instead of the generator
  std::size_t K = 2;
  std::size_t T = 5;
  std::size_t L = 1;
  std::vector<std::string> strategies{"heal"};
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  TaspConfig tasp;
  std::size_t greedy_samples = 1000;

  std::vector<std::size_t> sizes;       // runtime_nodes
  std::vector<std::size_t> k_values;    // scale_k
  std::vector<std::size_t> t_values;    // scale_t
  std::vector<std::size_t> deviations;  // deviation
  double planned_u = 0.1;               // sensitivity
  double planned_p = 0.6;
  std::vector<double> true_u;
  std::vector<double> true_p;
  double budget_seconds = 0.0;  // runtime kinds: rows slower than this are flagged in the summary

  /// Throws ValidationError on empty ranges, runs == 0 or unknown strategies.
  void validate() const;
};

/// Reads the JSON experiment document (see docs/api.md). Unknown keys are
/// rejected.
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc);

struct Configuration {
  std::string strategy;
  std::size_t n = 0;
  std::size_t K = 0;
  std::size_t T = 0;
  std::size_t L = 0;
  std::size_t deviations = 0;
  double planned_u = 0.0;
  double planned_p = 0.0;
  double true_u = 0.0;
  double true_p = 0.0;

  bool operator==(const Configuration&) const = default;
};

struct RunRow {
  Configuration config;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t total_influenced = 0;
  long indirect = 0;
  double wall_seconds = 0.0;
};

struct ConfigSummary {
  Configuration config;
  std::size_t runs = 0;
  ConfidenceInterval indirect;  // bootstrap-t, alpha = 0.05
  double mean_total = 0.0;
  double mean_seconds = 0.0;
  double max_seconds = 0.0;
};

/// Paired difference a - b of indirect influence over shared runs.
struct PairedComparison {
  std::string a;
  std::string b;
  ConfidenceInterval difference;
  bool significant = false;  // interval excludes zero and the mean is positive
};

struct SensitivityCell {
  double planned_u = 0.0;
  double planned_p = 0.0;
  double true_u = 0.0;
  double true_p = 0.0;
  double true_solution = 0.0;       // mean final influence when planning with the true values
  double estimated_solution = 0.0;  // same ground truths, planning with the planned values
  double loss_percent = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<RunRow> rows;  // configuration-major, run-minor
  std::vector<ConfigSummary> summaries;
  std::vector<PairedComparison> comparisons;  // quality: each strategy against the next one listed
  std::optional<double> deviation_spearman;
  std::vector<SensitivityCell> sensitivity;
};

/// Every run draws its network, ground truth and strategy seeds from the
/// master seed and the run index, so all strategies of a run face the same
/// world. Runs go in parallel except for the timing kinds.
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string rows_to_csv(const ExperimentResult& result);
std::string summary_to_csv(const ExperimentResult& result);
/// Per-figure aggregate table for the experiment kind.
std::string plot_data_csv(const ExperimentResult& result);
std::string summary_text(const ExperimentResult& result);

/// Wall seconds of one HEAL episode per size on WS(n, k, beta) graphs.
struct TimingRow {
  std::size_t n = 0;
  double wall_seconds = 0.0;
  bool within_budget = true;
};
std::vector<TimingRow> runtime_scaling(const std::vector<std::size_t>& sizes, const std::string& strategy,
                                       const ExperimentSpec& params);

}  // namespace dime
