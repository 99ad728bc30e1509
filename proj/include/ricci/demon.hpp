#pragma once

// Demon input: timed events that add a signed constant p to the cumulative
// input field lambda on every edge incident to the targeted nodes.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "ricci/errors.hpp"
#include "ricci/flow.hpp"
#include "ricci/graph.hpp"
#include "ricci/graph_io.hpp"

namespace ricci {

struct TopK {
  std::size_t k = 1;
  friend bool operator==(const TopK&, const TopK&) = default;
};

// Explicit node labels, or the k highest-degree nodes.
using TargetDirective = std::variant<std::vector<std::string>, TopK>;

struct InputEvent {
  std::size_t iteration = 0;
  TargetDirective targets = TopK{1};
  double magnitude = 0.0;

  friend bool operator==(const InputEvent&, const InputEvent&) = default;
};

inline std::vector<NodeId> resolve_targets(const TargetDirective& directive, const WeightedGraph& g) {
  if (const auto* top = std::get_if<TopK>(&directive)) {
    if (top->k > g.node_count())
      throw TargetError("top_k(" + std::to_string(top->k) + ") exceeds node count " +
                        std::to_string(g.node_count()));
    return top_degree_nodes(g, top->k);
  }
  std::vector<NodeId> out;
  for (const auto& label : std::get<std::vector<std::string>>(directive)) {
    auto id = g.find_node(label);
    if (!id) throw TargetError("unknown node '" + label + "'");
    out.push_back(*id);
  }
  return out;
}

// lambda += p once on every edge touching any of `nodes`.
inline EdgeField inject_input(const EdgeField& lambda, std::span<const NodeId> nodes, double p,
                              const WeightedGraph& g) {
  if (!std::isfinite(p)) throw ParameterError("input magnitude must be finite");
  if (lambda.size() != g.edge_count()) throw ParameterError("input field does not match the graph");
  std::vector<char> touched(g.edge_count(), 0);
  for (NodeId x : nodes) {
    if (x >= g.node_count()) throw TargetError("node index out of range");
    for (const auto& a : g.neighbors(x)) touched[a.edge] = 1;
  }
  EdgeField out = lambda;
  for (EdgeId e = 0; e < out.size(); ++e)
    if (touched[e]) out[e] += p;
  return out;
}

inline FlowState apply_event(const FlowState& state, const InputEvent& ev, const WeightedGraph& g) {
  auto nodes = resolve_targets(ev.targets, g);
  FlowState next = state;
  next.lambda = inject_input(state.lambda, nodes, ev.magnitude, g);
  return next;
}

inline std::string format_magnitude(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", p);
  return buf;
}

inline std::string describe_targets(const TargetDirective& d) {
  if (const auto* top = std::get_if<TopK>(&d)) return "top" + std::to_string(top->k);
  std::string out;
  for (const auto& l : std::get<std::vector<std::string>>(d)) {
    if (!out.empty()) out += '+';
    out += l;
  }
  return out;
}

// "p@top1" or "p@a+b"; used as the telemetry event marker.
inline std::string describe_event(const InputEvent& ev) {
  return format_magnitude(ev.magnitude) + "@" + describe_targets(ev.targets);
}

class InputSchedule {
 public:
  InputSchedule() = default;

  // Sorts by iteration (stable, so same-iteration events keep their order)
  // and rejects repeated (iteration, target set) pairs.
  explicit InputSchedule(std::vector<InputEvent> events) : events_(std::move(events)) {
    for (const auto& ev : events_)
      if (!std::isfinite(ev.magnitude)) throw ParameterError("input magnitude must be finite");
    std::stable_sort(events_.begin(), events_.end(),
                     [](const InputEvent& a, const InputEvent& b) { return a.iteration < b.iteration; });
    std::set<std::pair<std::size_t, std::string>> seen;
    for (const auto& ev : events_) {
      std::string key;
      if (const auto* top = std::get_if<TopK>(&ev.targets)) {
        key = "#top" + std::to_string(top->k);
      } else {
        auto labels = std::get<std::vector<std::string>>(ev.targets);
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        for (const auto& l : labels) key += l + '\n';
      }
      if (!seen.emplace(ev.iteration, key).second)
        throw ParameterError("two events share iteration " + std::to_string(ev.iteration) + " and targets");
    }
  }

  const std::vector<InputEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  std::optional<std::size_t> last_iteration() const {
    if (events_.empty()) return std::nullopt;
    return events_.back().iteration;
  }

  friend bool operator==(const InputSchedule&, const InputSchedule&) = default;

 private:
  std::vector<InputEvent> events_;
};

enum class PaperPreset { fig2_full, fig2_cutoff, fig3, fig4 };

// Published input protocols. fig3 takes theta in 1..5; fig4 takes the
// number of hub nodes targeted.
inline InputSchedule paper_schedule(PaperPreset preset, double theta = 5.0, std::size_t top_k = 1) {
  auto make = [](std::vector<std::size_t> its, std::vector<double> ps, std::size_t k) {
    std::vector<InputEvent> evs;
    for (std::size_t i = 0; i < its.size(); ++i) evs.push_back({its[i], TopK{k}, ps[i]});
    return InputSchedule(std::move(evs));
  };
  switch (preset) {
    case PaperPreset::fig2_full:
      return make({30, 75, 120, 175}, {-2, 2, 4, -4}, 1);
    case PaperPreset::fig2_cutoff:
      return make({30, 75, 120, 175}, {-2, 2, 0, 0}, 1);
    case PaperPreset::fig3:
      if (!(theta == 1 || theta == 2 || theta == 3 || theta == 4 || theta == 5))
        throw ParameterError("theta must be one of 1, 2, 3, 4, 5");
      return make({30, 75, 100, 200}, {-2, 2, theta, -theta}, 1);
    case PaperPreset::fig4:
      if (top_k == 0) throw ParameterError("fig4 needs at least one target node");
      return make({30, 75, 100, 200}, {-2, 2, 4, -4}, top_k);
  }
  throw ParameterError("unknown preset");
}

namespace detail {

inline TargetDirective parse_directive(const std::string& text) {
  if (text.size() > 3 && text.compare(0, 3, "top") == 0) {
    try {
      std::size_t used = 0;
      auto k = std::stoull(text.substr(3), &used);
      if (used == text.size() - 3) return TopK{static_cast<std::size_t>(k)};
    } catch (const std::exception&) {
    }
    throw ParseError("bad top-k directive '" + text + "'");
  }
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto plus = text.find('+', start);
    auto tok = text.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    if (tok.empty()) throw ParseError("empty node label in '" + text + "'");
    labels.push_back(tok);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return labels;
}

}  // namespace detail

// "30:-2,75:2,120:4,175:-4@top1". The optional trailing @directive (topK or
// labels joined by '+') applies to every event; it defaults to top1.
inline InputSchedule parse_schedule_shorthand(const std::string& text) {
  std::string body = text;
  TargetDirective directive = TopK{1};
  if (auto at = text.rfind('@'); at != std::string::npos) {
    body = text.substr(0, at);
    directive = detail::parse_directive(text.substr(at + 1));
  }
  std::vector<InputEvent> events;
  std::size_t start = 0;
  while (start < body.size()) {
    auto comma = body.find(',', start);
    auto item = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("schedule item '" + item + "' needs iteration:p");
    InputEvent ev;
    ev.targets = directive;
    try {
      std::size_t used = 0;
      auto its = item.substr(0, colon);
      if (its.empty() || its[0] == '-') throw ParseError("negative iteration");
      ev.iteration = std::stoull(its, &used);
      if (used != its.size()) throw ParseError("bad iteration");
      auto ps = item.substr(colon + 1);
      ev.magnitude = std::stod(ps, &used);
      if (used != ps.size()) throw ParseError("bad magnitude");
    } catch (const std::exception&) {
      throw ParseError("bad schedule item '" + item + "'");
    }
    events.push_back(std::move(ev));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return InputSchedule(std::move(events));
}

inline json event_to_json(const InputEvent& ev) {
  json j{{"iteration", ev.iteration}, {"p", ev.magnitude}};
  if (const auto* top = std::get_if<TopK>(&ev.targets)) {
    j["top_k"] = top->k;
  } else {
    json t = json::array();
    for (const auto& l : std::get<std::vector<std::string>>(ev.targets)) t.push_back(label_to_json(l));
    j["targets"] = std::move(t);
  }
  return j;
}

inline InputEvent event_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("schedule events must be objects");
  InputEvent ev;
  if (!j.contains("iteration") || !j["iteration"].is_number_integer() || j["iteration"].get<long long>() < 0)
    throw ParseError("event needs a nonnegative integer 'iteration'");
  ev.iteration = j["iteration"].get<std::size_t>();
  if (!j.contains("p") || !j["p"].is_number()) throw ParseError("event needs a numeric 'p'");
  ev.magnitude = j["p"].get<double>();
  const bool has_top = j.contains("top_k"), has_targets = j.contains("targets");
  if (has_top == has_targets) throw ParseError("event needs exactly one of 'targets' or 'top_k'");
  if (has_top) {
    if (!j["top_k"].is_number_integer() || j["top_k"].get<long long>() < 1)
      throw ParseError("'top_k' must be a positive integer");
    ev.targets = TopK{j["top_k"].get<std::size_t>()};
  } else {
    if (!j["targets"].is_array() || j["targets"].empty()) throw ParseError("'targets' must be a non-empty list");
    std::vector<std::string> labels;
    try {
      for (const auto& t : j["targets"]) labels.push_back(label_from_json(t));
    } catch (const GraphFormatError& e) {
      throw ParseError(e.what());
    }
    ev.targets = std::move(labels);
  }
  return ev;
}

inline json schedule_to_json(const InputSchedule& s) {
  json out = json::array();
  for (const auto& ev : s.events()) out.push_back(event_to_json(ev));
  return out;
}

inline InputSchedule schedule_from_json(const json& j) {
  if (j.is_string()) return parse_schedule_shorthand(j.get<std::string>());
  if (!j.is_array()) throw ParseError("schedule must be a list of events or a shorthand string");
  std::vector<InputEvent> evs;
  for (const auto& e : j) evs.push_back(event_from_json(e));
  return InputSchedule(std::move(evs));
}

}  // namespace ricci
