#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ricci/errors.hpp"
#include "ricci/graph.hpp"

namespace ricci {

using json = nlohmann::json;

// Shortest decimal that reads back to the same double.
inline std::string format_exact(double x) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// Node labels that spell a canonical integer travel as JSON numbers.
inline json label_to_json(const std::string& label) {
  if (!label.empty() && label.size() < 19 &&
      std::all_of(label.begin(), label.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
      (label == "0" || label[0] != '0'))
    return std::stoll(label);
  return label;
}

inline std::string label_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw GraphFormatError("node identifiers must be strings or integers");
}

namespace detail {

struct GraphBuilder {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<Edge> edges;
  std::vector<double> weights;

  NodeId node(const std::string& label) {
    auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  }

  WeightedGraph build() {
    const std::size_t n = labels.size();
    WeightedGraph g(n, std::move(edges), std::move(weights), std::move(labels));
    if (g.edge_count() == 0) throw GraphFormatError("graph has no edges");
    if (!is_connected(g)) throw DisconnectedError("graph is not connected");
    return g;
  }
};

}  // namespace detail

// One `x y [weight]` triple per line; blank lines and '#' comments skipped.
inline WeightedGraph read_edge_list(std::istream& in) {
  detail::GraphBuilder b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string x, y, w, extra;
    if (!(fields >> x)) continue;
    if (!(fields >> y)) throw GraphFormatError("line " + std::to_string(line_no) + ": expected 'x y [weight]'");
    double weight = 1.0;
    if (fields >> w) {
      char* end = nullptr;
      weight = std::strtod(w.c_str(), &end);
      if (end == w.c_str() || *end != '\0')
        throw GraphFormatError("line " + std::to_string(line_no) + ": bad weight '" + w + "'");
    }
    if (fields >> extra) throw GraphFormatError("line " + std::to_string(line_no) + ": trailing fields");
    NodeId u = b.node(x), v = b.node(y);
    b.edges.push_back({u, v});
    b.weights.push_back(weight);
  }
  return b.build();
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    out << g.label(ed.u) << ' ' << g.label(ed.v) << ' ' << format_exact(g.weight(e)) << '\n';
  }
}

inline WeightedGraph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges") || !j["nodes"].is_array() ||
      !j["edges"].is_array())
    throw GraphFormatError("graph JSON needs 'nodes' and 'edges' arrays");
  detail::GraphBuilder b;
  for (const auto& n : j["nodes"]) {
    auto label = label_from_json(n);
    if (b.index.count(label)) throw GraphFormatError("duplicate node '" + label + "'");
    b.node(label);
  }
  for (const auto& e : j["edges"]) {
    if (!e.is_object() || !e.contains("u") || !e.contains("v"))
      throw GraphFormatError("edges need 'u' and 'v'");
    auto u = label_from_json(e["u"]), v = label_from_json(e["v"]);
    if (!b.index.count(u) || !b.index.count(v)) throw GraphFormatError("edge references unknown node");
    double w = 1.0;
    if (e.contains("w")) {
      if (!e["w"].is_number()) throw GraphFormatError("edge weight must be a number");
      w = e["w"].get<double>();
    }
    b.edges.push_back({b.index[u], b.index[v]});
    b.weights.push_back(w);
  }
  return b.build();
}

inline json graph_to_json(const WeightedGraph& g) {
  json nodes = json::array();
  for (const auto& l : g.labels()) nodes.push_back(label_to_json(l));
  json edges = json::array();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    edges.push_back({{"u", label_to_json(g.label(ed.u))}, {"v", label_to_json(g.label(ed.v))}, {"w", g.weight(e)}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

// `.json` files use the JSON layout, anything else is an edge list.
inline WeightedGraph load_graph(const std::string& path) {
  std::string text = read_text_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return graph_from_json(parse_json_text(text, path));
  std::istringstream in(text);
  return read_edge_list(in);
}

}  // namespace ricci
