#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include <memory>
#include <string>

#include "dime/heal.hpp"
#include "dime/network.hpp"

namespace testing {

inline dime::UncertainNetwork fig2() { return dime::load_network_file(DIME_DATA_DIR "/fig2_network.json"); }

inline dime::UncertainNetwork path_network(std::size_t n, double p = 1.0) {
  std::vector<dime::Edge> edges;
  for (dime::NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, p, {}});
  return dime::UncertainNetwork(n, edges);
}

inline dime::UncertainNetwork two_triangles() {
  std::vector<dime::Edge> edges;
  for (dime::NodeId base : {0u, 3u}) {
    for (dime::NodeId a = 0; a < 3; ++a) {
      for (dime::NodeId b = 0; b < 3; ++b) {
        if (a != b) edges.push_back({base + a, base + b, 0.5, {}});
      }
    }
  }
  return dime::UncertainNetwork(6, edges);
}

inline dime::UncertainNetwork ws(std::size_t n, std::size_t k, double beta, double p, double u,
                                 double fraction, std::uint64_t seed) {
  dime::Rng rng(seed);
  auto net = dime::generate_watts_strogatz(n, k, beta, rng);
  return dime::decorate_uniform(net, p, u, fraction, rng);
}

// Edge-retiring cascade: an edge that fired successfully never tries again, every
// other edge out of an influenced node tries each step. Enumerated exactly over a
// fully present edge list; returns the distribution of W after `steps`.
struct RetiringState {
  std::uint64_t w;
  std::uint64_t done;
  auto operator<=>(const RetiringState&) const = default;
};

inline std::map<std::uint64_t, double> retiring_cascade(const std::vector<dime::Edge>& edges,
                                                        std::uint64_t w0, std::size_t steps) {
  std::map<RetiringState, double> dist{{{w0, 0}, 1.0}};
  for (std::size_t s = 0; s < steps; ++s) {
    std::map<RetiringState, double> next;
    for (const auto& [st, prob] : dist) {
      std::vector<std::size_t> trying;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        if ((st.w >> edges[i].src & 1) && !(st.done >> i & 1)) trying.push_back(i);
      }
      for (std::uint64_t outcome = 0; outcome < (1ULL << trying.size()); ++outcome) {
        double q = prob;
        RetiringState out = st;
        for (std::size_t j = 0; j < trying.size(); ++j) {
          const auto& e = edges[trying[j]];
          if (outcome >> j & 1) {
            q *= e.p;
            out.w |= 1ULL << e.dst;
            out.done |= 1ULL << trying[j];
          } else {
            q *= 1.0 - e.p;
          }
        }
        if (q > 0.0) next[out] += q;
      }
    }
    dist = std::move(next);
  }
  std::map<std::uint64_t, double> result;
  for (const auto& [st, prob] : dist) result[st.w] += prob;
  return result;
}

// HEAL with recommendations shared across episodes: the session is a pure
// function of (seed, history), so identical histories reuse one planning call.
class MemoHeal : public dime::Strategy {
 public:
  using Cache = std::map<std::string, dime::PlanSession>;

  MemoHeal(dime::PlanSession start, std::shared_ptr<Cache> cache)
      : session_(std::move(start)), cache_(std::move(cache)) {}

  std::string id() const override { return "heal"; }
  dime::ActionSet recommend() override {
    const auto it = cache_->find(key_);
    if (it != cache_->end()) {
      session_ = it->second;
    } else {
      session_.recommend();
      cache_->emplace(key_, session_);
    }
    return session_.recommend().action;
  }
  void record_execution(const dime::ActionSet& executed,
                        std::span<const dime::EdgeObservation> observations) override {
    key_ += executed.to_string();
    for (const auto& o : observations) key_ += std::to_string(o.uncertain_edge_index) + (o.exists ? "+" : "-");
    key_ += '|';
    session_.record_execution(executed, observations);
  }
  const dime::UncertainNetwork& network() const override { return session_.network(); }

 private:
  dime::PlanSession session_;
  std::shared_ptr<Cache> cache_;
  std::string key_;
};

}  // namespace testing
