#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "dime/baselines.hpp"
#include "dime/episode.hpp"
#include "dime/errors.hpp"
#include "dime/experiments.hpp"
#include "dime/heal.hpp"
#include "dime/network.hpp"
#include "dime/oracle.hpp"
#include "dime/partitioner.hpp"
#include "dime/service.hpp"
#include "dime/session_json.hpp"

namespace fs = std::filesystem;

namespace {

struct TaspFlags {
  std::optional<std::size_t> delta;
  std::optional<std::size_t> nsim;
  std::optional<double> ucb_c;
  std::optional<std::string> aggregation;

  void add(CLI::App* app) {
    app->add_option("--delta", delta, "determinizations per TASP call")->check(CLI::PositiveNumber);
    app->add_option("--nsim", nsim, "simulations per determinization")->check(CLI::PositiveNumber);
    app->add_option("--ucb-c", ucb_c, "UCB1 exploration constant")->check(CLI::PositiveNumber);
    app->add_option("--aggregation", aggregation, "mean or weighted")->check(CLI::IsMember({"mean", "weighted"}));
  }

  dime::TaspConfig apply(dime::TaspConfig c) const {
    if (delta) c.delta_count = *delta;
    if (nsim) c.nsim = *nsim;
    if (ucb_c) c.exploration_c = *ucb_c;
    if (aggregation) c.aggregation = dime::parse_aggregation(*aggregation);
    return c;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dime::ValidationError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw dime::ValidationError("cannot write " + path.string());
  out << content;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix + out.extension().string());
}

std::vector<dime::CandidateEdge> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dime::ValidationError("cannot open " + path);
  std::vector<dime::CandidateEdge> out;
  std::string line;
  std::getline(in, line);
  if (line != "src,dst,u,p") throw dime::ValidationError("candidate file must start with header src,dst,u,p");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    dime::CandidateEdge c;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> c.src >> c1 >> c.dst >> c2 >> c.u >> c3 >> c.p) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw dime::ValidationError("malformed candidate row at line " + std::to_string(lineno));
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential influence planning on uncertain networks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run an experiment spec and write per-run CSV rows");
  std::string spec_path;
  std::string out_path;
  bool plot_data = false;
  TaspFlags run_flags;
  run->add_option("--spec", spec_path, "experiment spec JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "per-run CSV output")->required();
  run->add_flag("--plot-data", plot_data, "also write the per-figure aggregate CSV");
  run_flags.add(run);

  // serve
  auto* serve = app.add_subcommand("serve", "serve the session API over HTTP");
  int port = 8080;
  std::string host = "0.0.0.0";
  std::string data_dir;
  std::string static_dir;
  double budget_ms = 0.0;
  serve->add_option("--port", port, "listen port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "listen address");
  serve->add_option("--data-dir", data_dir, "session journal directory");
  serve->add_option("--budget-ms", budget_ms, "default time budget per TASP evaluation, 0 for none")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--static-dir", static_dir, "serve console assets from this directory")
      ->check(CLI::ExistingDirectory);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one closed-loop episode and write its round log");
  std::string net_path;
  std::size_t K = 0, T = 0, L = 1;
  std::string strategy = "heal";
  std::uint64_t seed = 0;
  std::size_t deviations = 0;
  std::string log_path;
  TaspFlags sim_flags;
  sim->add_option("--network", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("-K,--K", K, "nodes per round")->required()->check(CLI::PositiveNumber);
  sim->add_option("-T,--T", T, "rounds")->required()->check(CLI::PositiveNumber);
  sim->add_option("-L,--L", L, "diffusion steps per round")->check(CLI::PositiveNumber);
  sim->add_option("--strategy", strategy, "heal|heal_t|greedy|degree|random")
      ->check(CLI::IsMember(dime::strategy_ids()));
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--deviations", deviations, "rounds replaced by random actions");
  sim->add_option("--out", log_path, "round log CSV (stdout when omitted)");
  sim_flags.add(sim);

  // recommend
  auto* rec = app.add_subcommand("recommend", "print the round-1 recommendation as JSON");
  std::string mode = "heal";
  TaspFlags rec_flags;
  rec->add_option("--network", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("-K,--K", K, "nodes per round")->required()->check(CLI::PositiveNumber);
  rec->add_option("-T,--T", T, "rounds")->required()->check(CLI::PositiveNumber);
  rec->add_option("-L,--L", L, "diffusion steps per round")->check(CLI::PositiveNumber);
  rec->add_option("--mode", mode, "heal or heal_t")->check(CLI::IsMember({"heal", "heal_t"}));
  rec->add_option("--seed", seed, "master seed");
  rec_flags.add(rec);

  // filter
  auto* filter = app.add_subcommand("filter", "build a network from candidate edges with u > tau");
  std::string candidates_path;
  std::size_t n_nodes = 0;
  double tau = 0.0;
  std::string filter_out;
  filter->add_option("--candidates", candidates_path, "CSV with header src,dst,u,p")->required()->check(CLI::ExistingFile);
  filter->add_option("--n-nodes", n_nodes, "node count")->required();
  filter->add_option("--tau", tau, "existence threshold")->required()->check(CLI::Range(0.0, 1.0));
  filter->add_option("--certain", net_path, "network JSON whose edges are kept as is");
  filter->add_option("--out", filter_out, "network JSON output")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "write a decorated Watts-Strogatz network");
  dime::GeneratorParams gp;
  std::string gen_out;
  gen->add_option("-n,--n", gp.n, "nodes")->required();
  gen->add_option("-k,--k", gp.k, "ring degree");
  gen->add_option("--beta", gp.beta, "rewiring probability");
  gen->add_option("--p", gp.p, "propagation probability");
  gen->add_option("--u", gp.u, "existence probability of uncertain edges");
  gen->add_option("--uncertain-fraction", gp.uncertain_fraction, "share of edges made uncertain");
  gen->add_option("--seed", seed, "seed");
  gen->add_option("--out", gen_out, "network JSON output")->required();

  // partition
  auto* part = app.add_subcommand("partition", "partition a network and write node,part CSV");
  std::size_t parts = 2;
  double imbalance = 0.1;
  std::string part_out;
  part->add_option("--network", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  part->add_option("-k,--parts", parts, "number of parts")->required()->check(CLI::PositiveNumber);
  part->add_option("--imbalance", imbalance, "allowed imbalance");
  part->add_option("--seed", seed, "seed");
  part->add_option("--out", part_out, "CSV output (stdout when omitted)");

  // verify
  auto* verify = app.add_subcommand("verify", "evaluate the hardness constructions exactly");
  std::size_t star_n = 3;
  double epsilon = 0.01;
  verify->add_option("--n", star_n, "star size")->check(CLI::Range(2, 1000000));
  verify->add_option("--epsilon", epsilon, "path uncertainty")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto spec = dime::parse_experiment_spec(nlohmann::json::parse(read_file(spec_path)));
      spec.tasp = run_flags.apply(spec.tasp);
      const dime::ExperimentResult result = dime::run_experiment(spec);
      const fs::path out(out_path);
      write_file(out, dime::rows_to_csv(result));
      write_file(sibling(out, "_summary"), dime::summary_to_csv(result));
      if (plot_data) write_file(sibling(out, "_plot"), dime::plot_data_csv(result));
      std::cout << dime::summary_text(result);
    } else if (*serve) {
      dime::ServiceOptions options;
      if (!data_dir.empty()) options.data_dir = data_dir;
      if (!static_dir.empty()) options.static_dir = static_dir;
      options.budget_ms = budget_ms;
      dime::SessionService service(options);
      httplib::Server server;
      service.mount(server);
      std::cerr << "listening on " << host << ':' << port << " (" << service.session_count()
                << " sessions restored)\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return 1;
      }
    } else if (*sim) {
      const dime::UncertainNetwork net = dime::load_network_file(net_path);
      dime::StrategyParams params;
      params.K = K;
      params.T = T;
      params.L = L;
      params.tasp = sim_flags.apply({});
      auto s = dime::make_strategy(strategy, net, params, dime::derive_seed(seed, 0));
      dime::Rng truth_rng(dime::derive_seed(seed, 1));
      const auto truth = dime::GroundTruth::sample(net, truth_rng);
      dime::EpisodeOptions options;
      options.deviations = deviations;
      const auto result = dime::run_episode(*s, truth, K, T, L, options, dime::derive_seed(seed, 2));
      const std::string csv = dime::episode_to_csv(result);
      if (log_path.empty()) {
        std::cout << csv;
      } else {
        write_file(log_path, csv);
      }
      std::cerr << "total influenced " << result.total_influenced << ", indirect " << result.indirect << '\n';
    } else if (*rec) {
      const dime::UncertainNetwork net = dime::load_network_file(net_path);
      auto session = dime::PlanSession::start(net, {K, T, L, dime::parse_planner_mode(mode)},
                                              rec_flags.apply({}), seed);
      std::cout << dime::recommendation_json(session.recommend()).dump(2) << '\n';
    } else if (*filter) {
      std::vector<dime::Edge> edges;
      if (!net_path.empty()) edges = dime::load_network_file(net_path).all_edges();
      const auto kept = dime::threshold_filter(read_candidates(candidates_path), tau);
      edges.insert(edges.end(), kept.begin(), kept.end());
      write_file(filter_out, dime::network_to_json(dime::UncertainNetwork(n_nodes, std::move(edges))) + "\n");
      std::cerr << kept.size() << " uncertain edges kept\n";
    } else if (*gen) {
      dime::Rng rng(seed);
      const auto topology = dime::generate_watts_strogatz(gp.n, gp.k, gp.beta, rng);
      const auto net = dime::decorate_uniform(topology, gp.p, gp.u, gp.uncertain_fraction, rng);
      write_file(gen_out, dime::network_to_json(net) + "\n");
    } else if (*part) {
      const dime::UncertainNetwork net = dime::load_network_file(net_path);
      dime::PartitionOptions options;
      options.imbalance = imbalance;
      const auto p = dime::partition(net, parts, options, seed);
      if (part_out.empty()) {
        std::cout << dime::partition_to_csv(p);
      } else {
        write_file(part_out, dime::partition_to_csv(p));
      }
      std::cerr << "cut weight " << p.cut_weight << '\n';
    } else if (*verify) {
      const auto t1 = dime::verify_theorem1(star_n);
      const auto t3 = dime::verify_theorem3(epsilon);
      std::cout.precision(17);
      std::cout << "star n=" << star_n << ": random pick " << t1.random_policy_value << ", full information "
                << t1.opt_full << ", ratio " << t1.ratio << '\n';
      std::cout << "path epsilon=" << epsilon << ": f(a,b,c)=" << t3.f_abc_psi2 << " f(a,c)=" << t3.f_ac_psi2
                << " marginal " << t3.marginal_psi2 << "; f(a,b)=" << t3.f_ab_psi1 << " f(a)=" << t3.f_a_psi1
                << " marginal " << t3.marginal_psi1 << '\n';
    }
  } catch (const dime::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
