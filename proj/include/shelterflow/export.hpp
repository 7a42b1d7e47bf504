#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/format.hpp"
#include "shelterflow/journeys.hpp"

namespace shelterflow {

enum class NodeSizing { area, diameter };

struct GraphStyleConfig {
  double min_labeled_rate = 1.0;  // edges below this are grey, fixed width, unlabeled
  double node_size_scale = 0.5;   // inches at value 1
  double edge_width_scale = 1.0;  // penwidth per unit value
  std::string grey_color = "lightgrey";
  int precision = 1;  // decimals for rates and percentages
  NodeSizing sizing = NodeSizing::area;
  double gateway_size = 0.8;
  double min_node_size = 0.3;

  void validate() const {
    if (!(min_labeled_rate >= 0.0)) throw ConfigError("style.min_labeled_rate must be >= 0");
    if (!(node_size_scale > 0.0) || !(edge_width_scale > 0.0))
      throw ConfigError("style scales must be positive");
    if (precision < 0 || precision > 12) throw ConfigError("style.precision must be in [0, 12]");
  }
};

struct RateGraph {
  Window window;
  std::vector<std::string> shelters;
  std::map<NodeId, std::int64_t> node_weights;
  std::map<Edge, std::int64_t> edge_weights;
  std::map<NodeId, double> node_rates;
  std::map<Edge, double> edge_rates;

  std::string name(NodeId n) const { return node_name(n, shelters); }
};

inline RateGraph to_rates(const FlowGraph& g) {
  if (g.window.duration_days <= 0) throw InvariantError("to_rates: window duration must be positive");
  const double days = g.window.duration_days;
  RateGraph r{g.window, g.shelters, g.node_weights, g.edge_weights, {}, {}};
  for (const auto& [n, w] : g.node_weights) r.node_rates[n] = static_cast<double>(w) / days;
  for (const auto& [e, w] : g.edge_weights) r.edge_rates[e] = static_cast<double>(w) / days;
  return r;
}

// Target against baseline, matched by node name so the two graphs need not
// share a shelter table.
struct RelativeEntry {
  double target_rate = 0.0;
  double baseline_rate = 0.0;
  std::optional<double> percent;  // empty when the baseline rate is zero

  bool is_new() const { return !percent && target_rate > 0.0; }
};

struct RelativeFlowGraph {
  std::string baseline_name;
  std::string target_name;
  std::map<std::string, NodeKind> kinds;
  std::map<std::string, RelativeEntry> nodes;  // shelters only
  std::map<std::pair<std::string, std::string>, RelativeEntry> edges;
};

inline RelativeFlowGraph normalize_relative(const RateGraph& target, const RateGraph& baseline,
                                            std::string target_name = "target",
                                            std::string baseline_name = "baseline") {
  RelativeFlowGraph rel;
  rel.target_name = std::move(target_name);
  rel.baseline_name = std::move(baseline_name);
  auto finish = [](RelativeEntry& e) {
    if (e.baseline_rate > 0.0) e.percent = 100.0 * e.target_rate / e.baseline_rate;
  };
  auto note_kind = [&](const RateGraph& g, NodeId n) { rel.kinds[g.name(n)] = n.kind; };

  for (const auto& [n, v] : target.node_rates) {
    note_kind(target, n);
    rel.nodes[target.name(n)].target_rate = v;
  }
  for (const auto& [n, v] : baseline.node_rates) {
    note_kind(baseline, n);
    rel.nodes[baseline.name(n)].baseline_rate = v;
  }
  for (const auto& [e, v] : target.edge_rates) {
    note_kind(target, e.first);
    note_kind(target, e.second);
    rel.edges[{target.name(e.first), target.name(e.second)}].target_rate = v;
  }
  for (const auto& [e, v] : baseline.edge_rates) {
    note_kind(baseline, e.first);
    note_kind(baseline, e.second);
    rel.edges[{baseline.name(e.first), baseline.name(e.second)}].baseline_rate = v;
  }
  for (auto& [_, e] : rel.nodes) finish(e);
  for (auto& [_, e] : rel.edges) finish(e);
  return rel;
}

// ---------------------------------------------------------------------------
// DOT

inline std::string format_percent(double pct, int precision) { return format_fixed(pct, precision) + "%"; }

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

namespace detail {

struct DotNode {
  NodeKind kind = NodeKind::shelter;
  double size_value = 0.0;  // drives node size for shelters
  std::string value_label;  // empty for gateways
};

struct DotEdge {
  double value = 0.0;  // drives width and the grey threshold
  std::string label;
  bool dashed = false;
};

inline const char* gateway_shape(NodeKind k) {
  switch (k) {
    case NodeKind::entry: return "house";
    case NodeKind::exit: return "invhouse";
    case NodeKind::gap: return "diamond";
    case NodeKind::multiple: return "octagon";
    case NodeKind::shelter: break;
  }
  return "circle";
}

inline std::string render_dot(const std::map<std::string, DotNode>& nodes,
                              const std::map<std::pair<std::string, std::string>, DotEdge>& edges,
                              const GraphStyleConfig& style, std::span<const std::string> comments) {
  std::ostringstream os;
  for (const auto& c : comments) os << "// " << c << '\n';
  os << "digraph flow {\n";
  if (!nodes.empty() || !edges.empty()) {
    os << "  graph [rankdir=LR];\n";
    os << "  node [fontsize=10];\n";
    os << "  edge [fontsize=9];\n";
  }
  for (const auto& [name, n] : nodes) {
    os << "  " << dot_quote(name) << " [";
    if (n.kind == NodeKind::shelter) {
      double size = n.size_value > 0.0 ? style.node_size_scale * (style.sizing == NodeSizing::area
                                                                      ? std::sqrt(n.size_value)
                                                                      : n.size_value)
                                       : 0.0;
      size = std::max(size, style.min_node_size);
      os << "shape=circle, fixedsize=true, width=" << format_fixed(size, 3) << ", label="
         << dot_quote(n.value_label.empty() ? name : name + "\n" + n.value_label);
    } else {
      os << "shape=" << gateway_shape(n.kind) << ", style=filled, fillcolor=\"gray90\""
         << ", fixedsize=true, width=" << format_fixed(style.gateway_size, 3)
         << ", label=" << dot_quote(name);
    }
    os << "];\n";
  }
  for (const auto& [key, e] : edges) {
    os << "  " << dot_quote(key.first) << " -> " << dot_quote(key.second) << " [";
    if (e.dashed) {
      os << "style=dashed, penwidth=1.000, label=" << dot_quote(e.label);
    } else if (e.value < style.min_labeled_rate) {
      os << "color=" << dot_quote(style.grey_color) << ", penwidth=1.000";
    } else {
      os << "penwidth=" << format_fixed(std::max(1.0, style.edge_width_scale * e.value), 3)
         << ", label=" << dot_quote(e.label);
    }
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

template <class Graph>
void add_endpoints(std::map<std::string, DotNode>& nodes, const Graph& g, const Edge& e) {
  nodes.try_emplace(g.name(e.first), DotNode{e.first.kind, 0.0, {}});
  nodes.try_emplace(g.name(e.second), DotNode{e.second.kind, 0.0, {}});
}

}  // namespace detail

// Absolute counts, as in a small worked example.
inline std::string emit_dot(const FlowGraph& g, const GraphStyleConfig& style = {},
                            std::span<const std::string> comments = {}) {
  std::map<std::string, detail::DotNode> nodes;
  std::map<std::pair<std::string, std::string>, detail::DotEdge> edges;
  for (const auto& [n, w] : g.node_weights)
    nodes[g.name(n)] = {n.kind, static_cast<double>(w), std::to_string(w)};
  for (const auto& [e, w] : g.edge_weights) {
    detail::add_endpoints(nodes, g, e);
    edges[{g.name(e.first), g.name(e.second)}] = {static_cast<double>(w), std::to_string(w), false};
  }
  return detail::render_dot(nodes, edges, style, comments);
}

// Per-day rates.
inline std::string emit_dot(const RateGraph& g, const GraphStyleConfig& style = {},
                            std::span<const std::string> comments = {}) {
  std::map<std::string, detail::DotNode> nodes;
  std::map<std::pair<std::string, std::string>, detail::DotEdge> edges;
  for (const auto& [n, r] : g.node_rates) nodes[g.name(n)] = {n.kind, r, format_fixed(r, style.precision)};
  for (const auto& [e, r] : g.edge_rates) {
    detail::add_endpoints(nodes, g, e);
    edges[{g.name(e.first), g.name(e.second)}] = {r, format_fixed(r, style.precision), false};
  }
  return detail::render_dot(nodes, edges, style, comments);
}

inline std::string relative_label(const RelativeEntry& e, int precision) {
  if (e.percent) return format_percent(*e.percent, precision);
  return e.is_new() ? "new" : "";
}

// Percent of baseline. Sizes and the grey threshold follow the target rates;
// edges with no baseline are drawn dashed with an infinity marker.
inline std::string emit_dot(const RelativeFlowGraph& g, const GraphStyleConfig& style = {},
                            std::span<const std::string> comments = {}) {
  std::map<std::string, detail::DotNode> nodes;
  std::map<std::pair<std::string, std::string>, detail::DotEdge> edges;
  for (const auto& [name, e] : g.nodes)
    nodes[name] = {NodeKind::shelter, e.target_rate, relative_label(e, style.precision)};
  for (const auto& [key, e] : g.edges) {
    for (const auto* end : {&key.first, &key.second})
      nodes.try_emplace(*end, detail::DotNode{g.kinds.at(*end), 0.0, {}});
    detail::DotEdge de{e.target_rate, relative_label(e, style.precision), false};
    if (e.is_new()) {
      de.dashed = true;
      de.label = "\xE2\x88\x9E";  // U+221E
    }
    edges[key] = std::move(de);
  }
  return detail::render_dot(nodes, edges, style, comments);
}

// ---------------------------------------------------------------------------
// JSON / CSV

inline nlohmann::json to_json(const RateGraph& g) {
  using nlohmann::json;
  std::map<std::string, json> nodes;
  for (const auto& [n, r] : g.node_rates) nodes[g.name(n)] = {{"weight", g.node_weights.at(n)}, {"rate", r}};
  json edges = json::array();
  std::map<std::pair<std::string, std::string>, json> sorted;
  for (const auto& [e, r] : g.edge_rates)
    sorted[{g.name(e.first), g.name(e.second)}] = {
        {"from", g.name(e.first)}, {"to", g.name(e.second)}, {"weight", g.edge_weights.at(e)}, {"rate", r}};
  for (auto& [_, j] : sorted) edges.push_back(std::move(j));
  return {{"window",
           {{"start", g.window.range.start.iso()},
            {"end", g.window.range.end.iso()},
            {"duration_days", g.window.duration_days}}},
          {"nodes", nodes},
          {"edges", edges}};
}

inline nlohmann::json to_json(const RelativeEntry& e) {
  return {{"target_rate", e.target_rate},
          {"baseline_rate", e.baseline_rate},
          {"percent", e.percent ? nlohmann::json(*e.percent) : nlohmann::json(nullptr)},
          {"new", e.is_new()}};
}

inline nlohmann::json to_json(const RelativeFlowGraph& g) {
  using nlohmann::json;
  json nodes = json::object();
  for (const auto& [name, e] : g.nodes) nodes[name] = to_json(e);
  json edges = json::array();
  for (const auto& [key, e] : g.edges) {
    json j = to_json(e);
    j["from"] = key.first;
    j["to"] = key.second;
    edges.push_back(std::move(j));
  }
  return {{"baseline", g.baseline_name}, {"target", g.target_name}, {"nodes", nodes}, {"edges", edges}};
}

// from,to,weight,rate,percent. Percent is empty without a baseline and
// "new" where the baseline rate is zero.
inline std::string edge_list_csv(const RateGraph& g, const RelativeFlowGraph* relative = nullptr) {
  std::ostringstream os;
  os << "from,to,weight,rate,percent\n";
  std::map<std::pair<std::string, std::string>, Edge> sorted;
  for (const auto& [e, _] : g.edge_weights) sorted[{g.name(e.first), g.name(e.second)}] = e;
  for (const auto& [names, e] : sorted) {
    os << csv_field(names.first) << ',' << csv_field(names.second) << ',' << g.edge_weights.at(e) << ','
       << format_number(g.edge_rates.at(e)) << ',';
    if (relative) {
      const auto& re = relative->edges.at(names);
      if (re.percent) os << format_number(*re.percent);
      else if (re.is_new()) os << "new";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace shelterflow
