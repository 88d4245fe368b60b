#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const int status = std::system((std::string(DIME_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / ("dime_cli_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("run twice gives the same rows") {
  const auto dir = temp_dir();
  {
    std::ofstream spec(dir / "spec.json");
    spec << R"({"kind": "quality", "network": {"n": 20, "k": 4}, "K": 2, "T": 3,
                "strategies": ["heal", "degree", "random"], "runs": 3, "seed": 4,
                "config": {"delta": 4, "nsim": 64}})";
  }
  const auto spec = (dir / "spec.json").string();
  REQUIRE(run("run --spec " + spec + " --out " + (dir / "a.csv").string() + " --plot-data") == 0);
  REQUIRE(run("run --spec " + spec + " --out " + (dir / "b.csv").string()) == 0);
  auto strip = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
  };
  CHECK(strip(read(dir / "a.csv")) == strip(read(dir / "b.csv")));
  CHECK(fs::exists(dir / "a_summary.csv"));
  CHECK(fs::exists(dir / "a_plot.csv"));
  fs::remove_all(dir);
}

TEST_CASE("subcommands") {
  const auto dir = temp_dir();
  const auto net = (dir / "net.json").string();
  CHECK(run("generate -n 30 -k 4 --seed 3 --out " + net) == 0);
  CHECK(run("partition --network " + net + " -k 3 --out " + (dir / "parts.csv").string()) == 0);
  CHECK(read(dir / "parts.csv").rfind("node_id,part", 0) == 0);
  CHECK(run("simulate --network " + net + " -K 2 -T 2 --strategy degree --out " + (dir / "log.csv").string()) == 0);
  CHECK(read(dir / "log.csv").rfind("round,recommended", 0) == 0);
  CHECK(run("recommend --network " + net + " -K 2 -T 2 --delta 2 --nsim 32") == 0);
  CHECK(run("verify --n 4 --epsilon 0.1") == 0);
  {
    std::ofstream c(dir / "cand.csv");
    c << "src,dst,u,p\n0,1,0.2,0.1\n1,2,0.7,0.1\n";
  }
  CHECK(run("filter --candidates " + (dir / "cand.csv").string() + " --n-nodes 3 --tau 0.5 --out " +
            (dir / "f.json").string()) == 0);
  const auto filtered = nlohmann::json::parse(read(dir / "f.json"));
  CHECK(filtered.at("edges").size() == 1);

  CHECK(run("filter --candidates " + (dir / "cand.csv").string() + " --n-nodes 3 --out x.json") != 0);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"n_nodes": 2, "edges": [{"src": 0, "dst": 1, "p": 1.3}]})";
  }
  CHECK(run("simulate --network " + (dir / "bad.json").string() + " -K 1 -T 1") == 2);
  CHECK(run("simulate --network " + net + " -K 40 -T 1") == 1);
  fs::remove_all(dir);
}
