#include "dime/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "dime/errors.hpp"

namespace dime {

namespace {

std::string edge_label(const Edge& e) {
  return "(" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")";
}

}  // namespace

UncertainNetwork::UncertainNetwork(std::size_t n_nodes, std::vector<Edge> edges,
                                   std::vector<std::string> labels)
    : n_nodes_(n_nodes), labels_(std::move(labels)) {
  if (n_nodes_ > static_cast<std::size_t>(INT32_MAX)) {
    throw ValidationError("node count too large");
  }
  if (!labels_.empty() && labels_.size() != n_nodes_) {
    throw ValidationError("label count does not match node count");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : edges) {
    if (e.src >= n_nodes_ || e.dst >= n_nodes_) {
      throw ValidationError("edge " + edge_label(e) + " references a node >= n_nodes");
    }
    if (e.src == e.dst) throw ValidationError("self-loop on node " + std::to_string(e.src));
    if (!(e.p >= 0.0 && e.p <= 1.0)) {
      throw ValidationError("edge " + edge_label(e) + " has p outside [0,1]");
    }
    if (e.u && !(*e.u > 0.0 && *e.u < 1.0)) {
      throw ValidationError("uncertain edge " + edge_label(e) + " needs 0 < u < 1");
    }
    if (!seen.emplace(e.src, e.dst).second) {
      throw ValidationError("duplicate edge " + edge_label(e));
    }
    (e.u ? uncertain_ : certain_).push_back(e);
  }
  if (uncertain_.size() > static_cast<std::size_t>(INT32_MAX)) {
    throw ValidationError("too many uncertain edges");
  }

  struct Entry {
    NodeId src;
    Arc arc;
  };
  std::vector<Entry> entries;
  entries.reserve(edge_count());
  for (const Edge& e : certain_) entries.push_back({e.src, {e.dst, e.p, -1}});
  for (std::size_t i = 0; i < uncertain_.size(); ++i) {
    const Edge& e = uncertain_[i];
    entries.push_back({e.src, {e.dst, e.p, static_cast<std::int32_t>(i)}});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.src, a.arc.dst) < std::tie(b.src, b.arc.dst);
  });
  offsets_.assign(n_nodes_ + 1, 0);
  for (const Entry& en : entries) ++offsets_[en.src + 1];
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  arcs_.reserve(entries.size());
  for (const Entry& en : entries) arcs_.push_back(en.arc);
}

std::vector<Edge> UncertainNetwork::all_edges() const {
  std::vector<Edge> out(certain_);
  out.insert(out.end(), uncertain_.begin(), uncertain_.end());
  return out;
}

std::optional<std::size_t> UncertainNetwork::find_uncertain(NodeId src, NodeId dst) const {
  if (src >= n_nodes_) return std::nullopt;
  for (const Arc& a : out_arcs(src)) {
    if (a.dst == dst) {
      if (a.uncertain_index < 0) return std::nullopt;
      return static_cast<std::size_t>(a.uncertain_index);
    }
  }
  return std::nullopt;
}

bool UncertainNetwork::has_edge(NodeId src, NodeId dst) const {
  if (src >= n_nodes_) return false;
  const auto arcs = out_arcs(src);
  return std::any_of(arcs.begin(), arcs.end(), [dst](const Arc& a) { return a.dst == dst; });
}

bool UncertainNetwork::operator==(const UncertainNetwork& other) const {
  return n_nodes_ == other.n_nodes_ && certain_ == other.certain_ &&
         uncertain_ == other.uncertain_ && labels_ == other.labels_;
}

LoadResult load_network(std::string_view document) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed network document: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("network document must be a JSON object");

  LoadResult result;
  try {
    const auto n_field = doc.at("n_nodes");
    if (!n_field.is_number_integer() || n_field.get<long long>() < 0) {
      throw ValidationError("n_nodes must be a non-negative integer");
    }
    const auto n = n_field.get<std::size_t>();

    std::vector<std::string> labels;
    if (doc.contains("nodes")) {
      bool any_label = false;
      std::vector<std::string> tmp(n);
      for (const auto& node : doc.at("nodes")) {
        const auto id = node.at("id").get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= n) {
          throw ValidationError("node id " + std::to_string(id) + " >= n_nodes");
        }
        if (node.contains("label") && !node.at("label").is_null()) {
          tmp[static_cast<std::size_t>(id)] = node.at("label").get<std::string>();
          any_label = true;
        }
      }
      if (any_label) labels = std::move(tmp);
    }

    std::vector<Edge> edges;
    for (const auto& je : doc.at("edges")) {
      const auto src = je.at("src").get<long long>();
      const auto dst = je.at("dst").get<long long>();
      if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n ||
          static_cast<std::size_t>(dst) >= n) {
        throw ValidationError("edge (" + std::to_string(src) + "," + std::to_string(dst) +
                              ") references a node >= n_nodes");
      }
      Edge e{static_cast<NodeId>(src), static_cast<NodeId>(dst), je.at("p").get<double>(), {}};
      if (je.contains("u") && !je.at("u").is_null()) {
        const double u = je.at("u").get<double>();
        if (!(u >= 0.0 && u <= 1.0)) {
          throw ValidationError("edge " + edge_label(e) + " has u outside [0,1]");
        }
        if (u == 0.0) {
          if (!(e.p >= 0.0 && e.p <= 1.0)) {
            throw ValidationError("edge " + edge_label(e) + " has p outside [0,1]");
          }
          ++result.dropped_zero_u;
          continue;
        }
        if (u == 1.0) {
          ++result.promoted_to_certain;
        } else {
          e.u = u;
        }
      }
      edges.push_back(e);
    }
    result.network = UncertainNetwork(n, std::move(edges), std::move(labels));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed network document: ") + e.what());
  }
  return result;
}

UncertainNetwork load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str()).network;
}

std::string network_to_json(const UncertainNetwork& net, int indent) {
  nlohmann::ordered_json doc;
  doc["n_nodes"] = net.node_count();
  auto nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    nlohmann::ordered_json node;
    node["id"] = i;
    if (!net.labels().empty()) node["label"] = net.labels()[i];
    nodes.push_back(node);
  }
  doc["nodes"] = nodes;
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : net.all_edges()) {
    nlohmann::ordered_json je;
    je["src"] = e.src;
    je["dst"] = e.dst;
    je["p"] = e.p;
    if (e.u) je["u"] = *e.u;
    edges.push_back(je);
  }
  doc["edges"] = edges;
  return doc.dump(indent);
}

std::string network_to_csv(const UncertainNetwork& net) {
  std::ostringstream out;
  out.precision(17);
  out << "src,dst,p,u\n";
  for (const Edge& e : net.all_edges()) {
    out << e.src << ',' << e.dst << ',' << e.p << ',';
    if (e.u) out << *e.u;
    out << '\n';
  }
  return out.str();
}

std::vector<Edge> threshold_filter(std::span<const CandidateEdge> candidates, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0,1]");
  std::vector<Edge> out;
  for (const CandidateEdge& c : candidates) {
    if (c.u > tau) out.push_back({c.src, c.dst, c.p, c.u >= 1.0 ? std::nullopt : std::optional(c.u)});
  }
  return out;
}

InstantiatedNetwork sample_instantiation(const UncertainNetwork& net, Rng& rng) {
  InstantiatedNetwork inst;
  inst.base = &net;
  inst.kept.resize(net.uncertain_count());
  for (std::size_t i = 0; i < net.uncertain_count(); ++i) {
    inst.kept[i] = rng.bernoulli(*net.uncertain_edge(i).u) ? 1 : 0;
  }
  inst.log_probability = instantiation_log_probability(net, inst.kept);
  return inst;
}

double instantiation_log_probability(const UncertainNetwork& net, const EdgeMask& kept) {
  if (kept.size() != net.uncertain_count()) {
    throw ValidationError("mask length does not match uncertain edge count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double u = *net.uncertain_edge(i).u;
    total += kept[i] ? std::log(u) : std::log1p(-u);
  }
  return total;
}

ObservationUpdate apply_observations(const UncertainNetwork& net,
                                     std::span<const EdgeObservation> observations) {
  const std::size_t m_u = net.uncertain_count();
  std::vector<int> resolution(m_u, -1);  // -1 unobserved, 0 absent, 1 exists
  for (const EdgeObservation& o : observations) {
    if (o.uncertain_edge_index >= m_u) {
      throw ValidationError("observation index " + std::to_string(o.uncertain_edge_index) +
                            " out of range");
    }
    if (resolution[o.uncertain_edge_index] != -1) {
      throw ValidationError("duplicate observation of uncertain edge " +
                            std::to_string(o.uncertain_edge_index));
    }
    resolution[o.uncertain_edge_index] = o.exists ? 1 : 0;
  }

  std::vector<Edge> edges(net.certain_edges().begin(), net.certain_edges().end());
  for (std::size_t i = 0; i < m_u; ++i) {
    if (resolution[i] == 1) {
      Edge e = net.uncertain_edge(i);
      e.u.reset();
      edges.push_back(e);
    }
  }
  ObservationUpdate update;
  update.index_map.assign(m_u, std::nullopt);
  std::size_t next = 0;
  for (std::size_t i = 0; i < m_u; ++i) {
    if (resolution[i] == -1) {
      edges.push_back(net.uncertain_edge(i));
      update.index_map[i] = next++;
    }
  }
  update.network = UncertainNetwork(net.node_count(), std::move(edges), net.labels());
  return update;
}

UncertainNetwork generate_watts_strogatz(std::size_t n, std::size_t k, double beta, Rng& rng) {
  if (k == 0 || n <= k) throw ValidationError("Watts-Strogatz needs 0 < k < n");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0,1]");
  const std::size_t half = k / 2;

  std::vector<std::pair<NodeId, NodeId>> ties;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j <= half; ++j) {
      ties.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + j) % n));
    }
  }
  if (k % 2 == 1) {
    const std::size_t opposite = n / 2;
    for (std::size_t i = 0; i < opposite; ++i) {
      ties.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(i + opposite));
    }
  }

  std::set<std::pair<NodeId, NodeId>> present;
  auto key = [](NodeId a, NodeId b) { return std::minmax(a, b); };
  for (const auto& [a, b] : ties) present.insert(key(a, b));

  for (auto& [a, b] : ties) {
    if (!rng.bernoulli(beta)) continue;
    // Give up on this tie if node a is already adjacent to everyone.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto c = static_cast<NodeId>(rng.below(n));
      if (c == a || present.count(key(a, c))) continue;
      present.erase(key(a, b));
      present.insert(key(a, c));
      b = c;
      break;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(ties.size() * 2);
  for (const auto& [a, b] : ties) {
    edges.push_back({a, b, 1.0, {}});
    edges.push_back({b, a, 1.0, {}});
  }
  return UncertainNetwork(n, std::move(edges));
}

UncertainNetwork decorate_uniform(const UncertainNetwork& net, double p, double u,
                                  double uncertain_fraction, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0,1]");
  if (!(uncertain_fraction >= 0.0 && uncertain_fraction <= 1.0)) {
    throw ValidationError("uncertain_fraction must lie in [0,1]");
  }
  std::vector<Edge> edges = net.all_edges();
  const auto m = edges.size();
  const auto n_uncertain = static_cast<std::size_t>(std::llround(uncertain_fraction * m));
  if (n_uncertain > 0 && !(u > 0.0 && u <= 1.0)) {
    throw ValidationError("u must lie in (0,1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::uint8_t> chosen(m, 0);
  for (std::size_t i = 0; i < n_uncertain; ++i) chosen[order[i]] = 1;
  for (std::size_t i = 0; i < m; ++i) {
    edges[i].p = p;
    edges[i].u.reset();
    if (chosen[i] && u < 1.0) edges[i].u = u;
  }
  return UncertainNetwork(net.node_count(), std::move(edges), net.labels());
}

UncertainNetwork certainty_equivalent(const UncertainNetwork& net) {
  std::vector<Edge> edges = net.all_edges();
  for (Edge& e : edges) {
    if (e.u) {
      e.p *= *e.u;
      e.u.reset();
    }
  }
  return UncertainNetwork(net.node_count(), std::move(edges), net.labels());
}

bool is_weakly_connected(const UncertainNetwork& net) {
  const std::size_t n = net.node_count();
  if (n <= 1) return true;
  std::vector<std::vector<NodeId>> adj(n);
  for (const Edge& e : net.all_edges()) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n;
}

}  // namespace dime
