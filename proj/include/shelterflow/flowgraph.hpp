#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"

namespace shelterflow {

// A dated move between graph locations.
//
// Dating rule, shared by windowed graphs and daily timelines:
//   Entry -> first      first day of the first segment
//   prev  -> next       first day of the destination segment
//   prev  -> Gap        day after prev.last_day
//   Gap   -> next       first day of the destination segment
//   last  -> Exit       day after the last segment's last_day
struct Transition {
  NodeId from;
  NodeId to;
  Day event_date;

  friend bool operator==(const Transition&, const Transition&) = default;
};

inline std::vector<Transition> extract_transitions(const LocationSequence& seq) {
  std::vector<Transition> out;
  if (seq.segments.empty()) return out;
  out.reserve(seq.segments.size() + seq.gap_count() + 1);
  const auto& segs = seq.segments;
  out.push_back({NodeId::entry(), segs.front().location, segs.front().first_day});
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const auto& prev = segs[i];
    const auto& next = segs[i + 1];
    if (seq.gap_flags[i]) {
      out.push_back({prev.location, NodeId::gap(), prev.last_day + 1});
      out.push_back({NodeId::gap(), next.location, next.first_day});
    } else if (prev.location != next.location) {
      out.push_back({prev.location, next.location, next.first_day});
    }
  }
  out.push_back({segs.back().location, NodeId::exit(), segs.back().last_day + 1});
  return out;
}

enum class TransitionMode {
  direct,    // Shelter -> different Shelter
  mobility,  // between distinct members of {Shelter(*), Multiple}
};

inline const char* to_string(TransitionMode m) {
  return m == TransitionMode::direct ? "direct" : "mobility";
}

inline std::optional<TransitionMode> transition_mode_from_string(std::string_view s) {
  if (s == "direct") return TransitionMode::direct;
  if (s == "mobility") return TransitionMode::mobility;
  return std::nullopt;
}

inline bool is_shelter_transition(NodeId from, NodeId to, TransitionMode mode) {
  if (from == to) return false;
  auto endpoint = [mode](NodeId n) {
    return n.is_shelter() || (mode == TransitionMode::mobility && n.kind == NodeKind::multiple);
  };
  return endpoint(from) && endpoint(to);
}

inline std::int64_t shelter_transition_count(std::span<const Transition> transitions,
                                             TransitionMode mode = TransitionMode::direct) {
  std::int64_t n = 0;
  for (const auto& t : transitions) n += is_shelter_transition(t.from, t.to, mode);
  return n;
}

// Analysis window: half-open date range plus the day count used to turn
// weights into per-day rates. The count defaults to the calendar length.
struct Window {
  DateRange range;
  std::int32_t duration_days = 0;

  static Window over(DateRange r, std::optional<std::int32_t> duration = std::nullopt) {
    if (r.empty()) throw ConfigError("analysis window is empty: " + r.start.iso() + " .. " + r.end.iso());
    const auto d = duration.value_or(r.length());
    if (d <= 0) throw ConfigError("window duration must be positive");
    return {r, d};
  }

  friend bool operator==(const Window&, const Window&) = default;
};

using Edge = std::pair<NodeId, NodeId>;

struct FlowGraph {
  Window window;
  std::vector<std::string> shelters;
  std::map<NodeId, std::int64_t> node_weights;  // shelters only; gateways carry none
  std::map<Edge, std::int64_t> edge_weights;

  std::string name(NodeId n) const { return node_name(n, shelters); }

  std::int64_t node_weight(NodeId n) const {
    auto it = node_weights.find(n);
    return it == node_weights.end() ? 0 : it->second;
  }

  std::int64_t edge_weight(NodeId from, NodeId to) const {
    auto it = edge_weights.find({from, to});
    return it == edge_weights.end() ? 0 : it->second;
  }

  std::int64_t in_weight(NodeId n) const {
    std::int64_t w = 0;
    for (const auto& [e, v] : edge_weights)
      if (e.second == n) w += v;
    return w;
  }

  std::int64_t out_weight(NodeId n) const {
    std::int64_t w = 0;
    for (const auto& [e, v] : edge_weights)
      if (e.first == n) w += v;
    return w;
  }

  // All nodes that carry weight or touch an edge.
  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    for (const auto& [n, _] : node_weights) out.push_back(n);
    for (const auto& [e, _] : edge_weights) {
      out.push_back(e.first);
      out.push_back(e.second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::map<std::string, std::int64_t> named_node_weights() const {
    std::map<std::string, std::int64_t> out;
    for (const auto& [n, w] : node_weights) out[name(n)] = w;
    return out;
  }

  std::map<std::pair<std::string, std::string>, std::int64_t> named_edge_weights() const {
    std::map<std::pair<std::string, std::string>, std::int64_t> out;
    for (const auto& [e, w] : edge_weights) out[{name(e.first), name(e.second)}] = w;
    return out;
  }
};

inline std::int64_t shelter_transition_count(const FlowGraph& g,
                                             TransitionMode mode = TransitionMode::direct) {
  std::int64_t n = 0;
  for (const auto& [e, w] : g.edge_weights)
    if (is_shelter_transition(e.first, e.second, mode)) n += w;
  return n;
}

// Per-person contribution to a windowed graph. Persons clipped by the window
// contribute only their in-window interactions and transitions; no synthetic
// Entry/Exit is added at the window edge.
class FlowGraphBuilder {
 public:
  FlowGraphBuilder(Window window, std::vector<std::string> shelters)
      : window_(window), shelters_(std::move(shelters)), node_counts_(shelters_.size(), 0) {}

  void add_days(std::span<const InteractionDay> days) {
    auto lo = std::lower_bound(days.begin(), days.end(), window_.range.start,
                               [](const InteractionDay& d, Day x) { return d.date < x; });
    for (auto it = lo; it != days.end() && it->date < window_.range.end; ++it)
      for (auto s : it->shelters) ++node_counts_.at(index(s));
  }

  void add_transitions(std::span<const Transition> transitions) {
    for (const auto& t : transitions)
      if (window_.range.contains(t.event_date)) ++edges_[{t.from, t.to}];
  }

  FlowGraph build() const {
    FlowGraph g;
    g.window = window_;
    g.shelters = shelters_;
    for (std::uint32_t i = 0; i < node_counts_.size(); ++i)
      if (node_counts_[i] > 0) g.node_weights[NodeId::of(static_cast<ShelterId>(i))] = node_counts_[i];
    for (const auto& [e, w] : edges_) {
      if (e.first == e.second) throw InvariantError("self-loop edge at " + g.name(e.first));
      if (e.first.kind == NodeKind::exit || e.second.kind == NodeKind::entry)
        throw InvariantError("edge leaves Exit or enters Entry");
      g.edge_weights[e] = w;
    }
    return g;
  }

 private:
  Window window_;
  std::vector<std::string> shelters_;
  std::vector<std::int64_t> node_counts_;
  std::map<Edge, std::int64_t> edges_;
};

// `sequences[i]` must be the location sequence of `corpus.persons[i]`.
inline FlowGraph build_flow_graph(const Corpus& corpus, std::span<const LocationSequence> sequences,
                                  const Window& window) {
  if (window.range.empty()) throw ConfigError("analysis window is empty");
  if (sequences.size() != corpus.persons.size())
    throw InvariantError("sequence count does not match person count");
  FlowGraphBuilder builder(window, corpus.shelters);
  for (std::size_t i = 0; i < corpus.persons.size(); ++i) {
    builder.add_days(corpus.persons[i].days);
    builder.add_transitions(extract_transitions(sequences[i]));
  }
  return builder.build();
}

// Element-wise sum of two graphs over the same window and shelter table.
inline FlowGraph merge(FlowGraph a, const FlowGraph& b) {
  if (!(a.window == b.window) || a.shelters != b.shelters)
    throw InvariantError("cannot merge graphs over different windows or shelter tables");
  for (const auto& [n, w] : b.node_weights) a.node_weights[n] += w;
  for (const auto& [e, w] : b.edge_weights) a.edge_weights[e] += w;
  return a;
}

// Canonical form: object keys sorted, edges sorted by (from, to) name.
inline nlohmann::json to_json(const FlowGraph& g) {
  using nlohmann::json;
  json nodes = json::object();
  for (const auto& [name, w] : g.named_node_weights()) nodes[name] = w;
  json edges = json::array();
  for (const auto& [e, w] : g.named_edge_weights())
    edges.push_back({{"from", e.first}, {"to", e.second}, {"weight", w}});
  return {{"window",
           {{"start", g.window.range.start.iso()},
            {"end", g.window.range.end.iso()},
            {"duration_days", g.window.duration_days}}},
          {"nodes", nodes},
          {"edges", edges}};
}

}  // namespace shelterflow
