#include "dime/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dime/baselines.hpp"
#include "dime/episode.hpp"
#include "dime/errors.hpp"
#include "dime/session_json.hpp"

namespace dime {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::quality: return "quality";
    case ExperimentKind::runtime_nodes: return "runtime_nodes";
    case ExperimentKind::scale_k: return "scale_k";
    case ExperimentKind::scale_t: return "scale_t";
    case ExperimentKind::deviation: return "deviation";
    case ExperimentKind::sensitivity: return "sensitivity";
  }
  return "quality";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::quality, ExperimentKind::runtime_nodes, ExperimentKind::scale_k,
                 ExperimentKind::scale_t, ExperimentKind::deviation, ExperimentKind::sensitivity}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown experiment kind '" + s + "'");
}

void ExperimentSpec::validate() const {
  if (runs == 0) throw ValidationError("runs must be at least 1");
  if (strategies.empty()) throw ValidationError("at least one strategy is required");
  const auto& ids = strategy_ids();
  for (const auto& s : strategies) {
    if (std::find(ids.begin(), ids.end(), s) == ids.end()) throw ValidationError("unknown strategy '" + s + "'");
  }
  if (K == 0 || T == 0) throw ValidationError("K and T must be at least 1");
  tasp.validate();
  auto need = [](bool empty, const char* what) {
    if (empty) throw ValidationError(std::string(what) + " must not be empty for this experiment kind");
  };
  switch (kind) {
    case ExperimentKind::runtime_nodes:
      need(sizes.empty(), "sizes");
      if (!std::is_sorted(sizes.begin(), sizes.end())) throw ValidationError("sizes must be ascending");
      break;
    case ExperimentKind::scale_k: need(k_values.empty(), "k_values"); break;
    case ExperimentKind::scale_t: need(t_values.empty(), "t_values"); break;
    case ExperimentKind::deviation: need(deviations.empty(), "deviations"); break;
    case ExperimentKind::sensitivity:
      need(true_u.empty(), "true_u");
      need(true_p.empty(), "true_p");
      break;
    case ExperimentKind::quality: break;
  }
}

namespace {

template <typename T>
std::vector<T> list_of(const json& doc, const char* key) {
  if (!doc.at(key).is_array()) throw ValidationError(std::string(key) + " must be an array");
  return doc.at(key).get<std::vector<T>>();
}

}  // namespace

ExperimentSpec parse_experiment_spec(const json& doc) {
  if (!doc.is_object()) throw ValidationError("experiment spec must be a JSON object");
  static const std::set<std::string> known{
      "kind", "network", "K", "T", "L", "strategies", "runs", "seed", "config", "greedy_samples",
      "sizes", "k_values", "t_values", "deviations", "planned", "true_u", "true_p", "budget_seconds"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ValidationError("unknown experiment key '" + key + "'");
  }
  ExperimentSpec s;
  try {
    s.kind = parse_experiment_kind(doc.at("kind").get<std::string>());
    if (doc.contains("network")) {
      const json& net = doc.at("network");
      if (net.contains("file")) {
        s.network_file = net.at("file").get<std::string>();
      } else {
        GeneratorParams& g = s.generator;
        if (net.contains("generator") && net.at("generator").get<std::string>() != "watts_strogatz") {
          throw ValidationError("only the watts_strogatz generator is available");
        }
        g.n = net.value("n", g.n);
        g.k = net.value("k", g.k);
        g.beta = net.value("beta", g.beta);
        g.p = net.value("p", g.p);
        g.u = net.value("u", g.u);
        g.uncertain_fraction = net.value("uncertain_fraction", g.uncertain_fraction);
      }
    }
    s.K = doc.value("K", s.K);
    s.T = doc.value("T", s.T);
    s.L = doc.value("L", s.L);
    if (doc.contains("strategies")) s.strategies = list_of<std::string>(doc, "strategies");
    s.runs = doc.value("runs", s.runs);
    s.seed = doc.value("seed", s.seed);
    if (doc.contains("config")) s.tasp = tasp_config_from_json(doc.at("config"));
    s.greedy_samples = doc.value("greedy_samples", s.greedy_samples);
    if (doc.contains("sizes")) s.sizes = list_of<std::size_t>(doc, "sizes");
    if (doc.contains("k_values")) s.k_values = list_of<std::size_t>(doc, "k_values");
    if (doc.contains("t_values")) s.t_values = list_of<std::size_t>(doc, "t_values");
    if (doc.contains("deviations")) {
      s.deviations = list_of<std::size_t>(doc, "deviations");
    } else if (s.kind == ExperimentKind::deviation) {
      s.deviations = {0, 1, 2, 3, 4, 5};
    }
    if (doc.contains("planned")) {
      s.planned_u = doc.at("planned").at("u").get<double>();
      s.planned_p = doc.at("planned").at("p").get<double>();
    }
    if (doc.contains("true_u")) {
      s.true_u = list_of<double>(doc, "true_u");
    } else if (s.kind == ExperimentKind::sensitivity) {
      s.true_u = {0.1, 0.2, 0.3};
    }
    if (doc.contains("true_p")) {
      s.true_p = list_of<double>(doc, "true_p");
    } else if (s.kind == ExperimentKind::sensitivity) {
      s.true_p = {0.5, 0.6, 0.7};
    }
    s.budget_seconds = doc.value("budget_seconds", s.budget_seconds);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment spec: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

bool timing_kind(ExperimentKind k) {
  return k == ExperimentKind::runtime_nodes || k == ExperimentKind::scale_k || k == ExperimentKind::scale_t;
}

std::vector<Configuration> configurations(const ExperimentSpec& spec, std::size_t file_n) {
  const std::size_t n = spec.network_file ? file_n : spec.generator.n;
  Configuration base{"", n, spec.K, spec.T, spec.L, 0, spec.generator.u, spec.generator.p,
                     spec.generator.u, spec.generator.p};
  std::vector<Configuration> out;
  auto each_strategy = [&](Configuration c) {
    for (const auto& s : spec.strategies) {
      c.strategy = s;
      out.push_back(c);
    }
  };
  switch (spec.kind) {
    case ExperimentKind::quality: each_strategy(base); break;
    case ExperimentKind::runtime_nodes:
      for (std::size_t size : spec.sizes) {
        Configuration c = base;
        c.n = size;
        each_strategy(c);
      }
      break;
    case ExperimentKind::scale_k:
      for (std::size_t k : spec.k_values) {
        Configuration c = base;
        c.K = k;
        each_strategy(c);
      }
      break;
    case ExperimentKind::scale_t:
      for (std::size_t t : spec.t_values) {
        Configuration c = base;
        c.T = t;
        each_strategy(c);
      }
      break;
    case ExperimentKind::deviation:
      for (std::size_t d : spec.deviations) {
        Configuration c = base;
        c.deviations = d;
        each_strategy(c);
      }
      break;
    case ExperimentKind::sensitivity:
      for (double tu : spec.true_u) {
        for (double tp : spec.true_p) {
          Configuration c = base;
          c.strategy = spec.strategies.front();
          c.true_u = tu;
          c.true_p = tp;
          c.planned_u = tu;
          c.planned_p = tp;
          out.push_back(c);
          c.planned_u = spec.planned_u;
          c.planned_p = spec.planned_p;
          out.push_back(c);
        }
      }
      break;
  }
  return out;
}

struct World {
  UncertainNetwork planned;
  UncertainNetwork truth_network;
};

World make_world(const ExperimentSpec& spec, const Configuration& c, std::size_t run,
                 const std::optional<UncertainNetwork>& file_net) {
  World w;
  const bool redecorate = !file_net || spec.kind == ExperimentKind::sensitivity;
  UncertainNetwork topology;
  if (file_net) {
    topology = *file_net;
  } else {
    Rng rng(derive_seed(spec.seed, run, c.n, 1));
    topology = generate_watts_strogatz(c.n, spec.generator.k, spec.generator.beta, rng);
  }
  if (!redecorate) {
    w.planned = topology;
    w.truth_network = topology;
    return w;
  }
  const double fraction = spec.generator.uncertain_fraction;
  Rng planned_rng(derive_seed(spec.seed, run, c.n, 2));
  w.planned = decorate_uniform(topology, c.planned_p, c.planned_u, fraction, planned_rng);
  Rng truth_rng(derive_seed(spec.seed, run, c.n, 2));
  w.truth_network = decorate_uniform(topology, c.true_p, c.true_u, fraction, truth_rng);
  return w;
}

RunRow run_one(const ExperimentSpec& spec, const Configuration& c, std::size_t run,
               const std::optional<UncertainNetwork>& file_net) {
  RunRow row;
  row.config = c;
  row.run = run;
  row.seed = derive_seed(spec.seed, run);
  const World world = make_world(spec, c, run, file_net);
  Rng truth_rng(derive_seed(spec.seed, run, c.n, 3));
  const GroundTruth truth = GroundTruth::sample(world.truth_network, truth_rng);

  StrategyParams params;
  params.K = c.K;
  params.T = c.T;
  params.L = c.L;
  params.tasp = spec.tasp;
  params.greedy_samples = spec.greedy_samples;

  const auto started = std::chrono::steady_clock::now();
  auto strategy = make_strategy(c.strategy, world.planned, params, derive_seed(spec.seed, run, c.n, 4));
  EpisodeOptions options;
  options.deviations = c.deviations;
  const EpisodeResult ep = run_episode(*strategy, truth, c.K, c.T, c.L, options, derive_seed(spec.seed, run, c.n, 5));
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  row.total_influenced = ep.total_influenced;
  row.indirect = ep.indirect;
  return row;
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

std::string config_cells(const Configuration& c) {
  std::ostringstream out;
  out << c.strategy << ',' << c.n << ',' << c.K << ',' << c.T << ',' << c.L << ',' << c.deviations << ','
      << num(c.planned_u) << ',' << num(c.planned_p) << ',' << num(c.true_u) << ',' << num(c.true_p);
  return out.str();
}

constexpr const char* kConfigHeader = "strategy,n,K,T,L,deviations,planned_u,planned_p,true_u,true_p";

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;

  std::optional<UncertainNetwork> file_net;
  if (spec.network_file) file_net = load_network_file(*spec.network_file);
  const std::vector<Configuration> configs = configurations(spec, file_net ? file_net->node_count() : 0);

  const std::size_t tasks = configs.size() * spec.runs;
  result.rows.resize(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  auto task = [&](std::size_t i) {
    const Configuration& c = configs[i / spec.runs];
    const std::size_t run = i % spec.runs;
    try {
      result.rows[i] = run_one(spec, c, run, file_net);
    } catch (const std::exception& e) {
      errors[i] = std::make_exception_ptr(
          std::runtime_error("run " + std::to_string(run) + " (" + c.strategy + "): " + e.what()));
    }
  };
  if (timing_kind(spec.kind)) {
    for (std::size_t i = 0; i < tasks; ++i) task(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(tasks); ++i) task(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    ConfigSummary s;
    s.config = configs[ci];
    s.runs = spec.runs;
    std::vector<double> indirect;
    double total = 0.0;
    double seconds = 0.0;
    for (std::size_t r = 0; r < spec.runs; ++r) {
      const RunRow& row = result.rows[ci * spec.runs + r];
      indirect.push_back(static_cast<double>(row.indirect));
      total += static_cast<double>(row.total_influenced);
      seconds += row.wall_seconds;
      s.max_seconds = std::max(s.max_seconds, row.wall_seconds);
    }
    s.indirect = bootstrap_t_interval(indirect, 0.05, 2000, derive_seed(spec.seed, 0xb0075, ci));
    s.mean_total = total / static_cast<double>(spec.runs);
    s.mean_seconds = seconds / static_cast<double>(spec.runs);
    result.summaries.push_back(s);
  }

  if (spec.kind == ExperimentKind::quality) {
    for (std::size_t i = 0; i + 1 < configs.size(); ++i) {
      std::vector<double> diff;
      for (std::size_t r = 0; r < spec.runs; ++r) {
        diff.push_back(static_cast<double>(result.rows[i * spec.runs + r].indirect -
                                           result.rows[(i + 1) * spec.runs + r].indirect));
      }
      PairedComparison pc;
      pc.a = configs[i].strategy;
      pc.b = configs[i + 1].strategy;
      pc.difference = bootstrap_t_interval(diff, 0.05, 2000, derive_seed(spec.seed, 0xd1ff, i));
      pc.significant = pc.difference.lower > 0.0;
      result.comparisons.push_back(pc);
    }
  }

  if (spec.kind == ExperimentKind::deviation) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const ConfigSummary& s : result.summaries) {
      if (s.config.strategy != spec.strategies.front()) continue;
      xs.push_back(static_cast<double>(s.config.deviations));
      ys.push_back(s.indirect.mean);
    }
    result.deviation_spearman = spearman_rho(xs, ys);
  }

  if (spec.kind == ExperimentKind::sensitivity) {
    for (std::size_t i = 0; i + 1 < result.summaries.size(); i += 2) {
      const ConfigSummary& truth = result.summaries[i];
      const ConfigSummary& est = result.summaries[i + 1];
      SensitivityCell cell;
      cell.planned_u = est.config.planned_u;
      cell.planned_p = est.config.planned_p;
      cell.true_u = truth.config.true_u;
      cell.true_p = truth.config.true_p;
      cell.true_solution = truth.mean_total;
      cell.estimated_solution = est.mean_total;
      cell.loss_percent = cell.true_solution > 0.0
                              ? 100.0 * (cell.true_solution - cell.estimated_solution) / cell.true_solution
                              : 0.0;
      result.sensitivity.push_back(cell);
    }
  }
  return result;
}

std::string rows_to_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "run,seed," << kConfigHeader << ",total_influenced,indirect_influence,wall_seconds\n";
  for (const RunRow& r : result.rows) {
    out << r.run << ',' << r.seed << ',' << config_cells(r.config) << ',' << r.total_influenced << ','
        << r.indirect << ',' << num(r.wall_seconds) << '\n';
  }
  return out.str();
}

std::string summary_to_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << kConfigHeader << ",runs,mean_indirect,ci_lower,ci_upper,mean_total,mean_seconds,max_seconds\n";
  for (const ConfigSummary& s : result.summaries) {
    out << config_cells(s.config) << ',' << s.runs << ',' << num(s.indirect.mean) << ',' << num(s.indirect.lower)
        << ',' << num(s.indirect.upper) << ',' << num(s.mean_total) << ',' << num(s.mean_seconds) << ','
        << num(s.max_seconds) << '\n';
  }
  return out.str();
}

std::string plot_data_csv(const ExperimentResult& result) {
  std::ostringstream out;
  switch (result.spec.kind) {
    case ExperimentKind::quality:
      out << "strategy,mean_indirect,ci_lower,ci_upper\n";
      for (const auto& s : result.summaries) {
        out << s.config.strategy << ',' << num(s.indirect.mean) << ',' << num(s.indirect.lower) << ','
            << num(s.indirect.upper) << '\n';
      }
      break;
    case ExperimentKind::runtime_nodes:
      out << "n,strategy,mean_seconds\n";
      for (const auto& s : result.summaries) out << s.config.n << ',' << s.config.strategy << ',' << num(s.mean_seconds) << '\n';
      break;
    case ExperimentKind::scale_k:
    case ExperimentKind::scale_t: {
      const bool k = result.spec.kind == ExperimentKind::scale_k;
      out << (k ? "K" : "T") << ",strategy,mean_indirect,mean_seconds\n";
      for (const auto& s : result.summaries) {
        out << (k ? s.config.K : s.config.T) << ',' << s.config.strategy << ',' << num(s.indirect.mean) << ','
            << num(s.mean_seconds) << '\n';
      }
      break;
    }
    case ExperimentKind::deviation:
      out << "deviations,strategy,mean_indirect,ci_lower,ci_upper\n";
      for (const auto& s : result.summaries) {
        out << s.config.deviations << ',' << s.config.strategy << ',' << num(s.indirect.mean) << ','
            << num(s.indirect.lower) << ',' << num(s.indirect.upper) << '\n';
      }
      break;
    case ExperimentKind::sensitivity:
      out << "planned_u,planned_p,true_u,true_p,true_solution,estimated_solution,loss_percent\n";
      for (const auto& c : result.sensitivity) {
        out << num(c.planned_u) << ',' << num(c.planned_p) << ',' << num(c.true_u) << ',' << num(c.true_p) << ','
            << num(c.true_solution) << ',' << num(c.estimated_solution) << ',' << num(c.loss_percent) << '\n';
      }
      break;
  }
  return out.str();
}

std::string summary_text(const ExperimentResult& result) {
  std::ostringstream out;
  out << "experiment " << to_string(result.spec.kind) << ", " << result.spec.runs << " runs, seed "
      << result.spec.seed << '\n';
  for (const ConfigSummary& s : result.summaries) {
    out << "  " << s.config.strategy << " n=" << s.config.n << " K=" << s.config.K << " T=" << s.config.T
        << " L=" << s.config.L;
    if (result.spec.kind == ExperimentKind::deviation) out << " d=" << s.config.deviations;
    if (result.spec.kind == ExperimentKind::sensitivity) {
      out << " planned(u=" << s.config.planned_u << ",p=" << s.config.planned_p << ") true(u=" << s.config.true_u
          << ",p=" << s.config.true_p << ")";
    }
    out << ": indirect " << num(s.indirect.mean) << " [" << num(s.indirect.lower) << ", " << num(s.indirect.upper)
        << "], " << num(s.mean_seconds) << " s/run";
    if (result.spec.budget_seconds > 0.0 && s.max_seconds > result.spec.budget_seconds) out << " OVER BUDGET";
    out << '\n';
  }
  for (const PairedComparison& pc : result.comparisons) {
    out << "  " << pc.a << " - " << pc.b << ": " << num(pc.difference.mean) << " [" << num(pc.difference.lower)
        << ", " << num(pc.difference.upper) << "]" << (pc.significant ? " significant" : "") << '\n';
  }
  if (result.deviation_spearman) out << "  spearman rho over deviations: " << num(*result.deviation_spearman) << '\n';
  for (const SensitivityCell& c : result.sensitivity) {
    out << "  loss true(u=" << c.true_u << ",p=" << c.true_p << "): " << num(c.loss_percent) << "%\n";
  }
  return out.str();
}

std::vector<TimingRow> runtime_scaling(const std::vector<std::size_t>& sizes, const std::string& strategy,
                                       const ExperimentSpec& params) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ValidationError("sizes must be ascending");
  ExperimentSpec spec = params;
  spec.kind = ExperimentKind::runtime_nodes;
  spec.sizes = sizes;
  spec.strategies = {strategy};
  spec.runs = 1;
  spec.network_file.reset();
  std::vector<TimingRow> out;
  for (std::size_t n : sizes) {
    Configuration c{strategy, n, spec.K, spec.T, spec.L, 0, spec.generator.u, spec.generator.p,
                    spec.generator.u, spec.generator.p};
    TimingRow row;
    row.n = n;
    try {
      row.wall_seconds = run_one(spec, c, 0, std::nullopt).wall_seconds;
      row.within_budget = spec.budget_seconds <= 0.0 || row.wall_seconds <= spec.budget_seconds;
    } catch (const CapacityError&) {
      row.within_budget = false;
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace dime
