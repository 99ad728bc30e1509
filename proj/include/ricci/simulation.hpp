#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ricci/curvature.hpp"
#include "ricci/demon.hpp"
#include "ricci/entropy.hpp"
#include "ricci/flow.hpp"
#include "ricci/graph.hpp"

namespace ricci {

// One telemetry sample. `sigma` is NaN when the run has no fixed target.
struct TelemetryRow {
  std::size_t iteration = 0;
  double t = 0.0;
  double H = 0.0;
  double kappa_mean_unweighted = 0.0;
  double kappa_mean_weighted = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double sigma_hat = 0.0;
  double gamma_total = 0.0;
  double v_total = 0.0;
  std::string event_marker;
};

struct Telemetry {
  std::vector<TelemetryRow> rows;
};

// Stateful driver of the coupled flow shared by batch runs and live
// sessions, so both produce the same rows for the same inputs.
//
// Row i describes the state at iteration i. Events injected at iteration i
// change lambda before step i; their markers land on row i + 1, the first
// row that reflects them.
class Simulation {
 public:
  Simulation(const WeightedGraph& g, ControlConfig cfg, std::optional<EdgeField> target = std::nullopt,
             std::size_t workers = 1)
      : cfg_(cfg), engine_(g, workers), topology_(g) {
    cfg_.validate();
    if (!is_connected(g)) throw DisconnectedError("simulation needs a connected graph");
    state_ = initial_state(g, cfg_, std::move(target));
    refresh_curvature();
    record();
  }

  void inject(const InputEvent& ev) {
    state_ = apply_event(state_, ev, topology_);
    if (!pending_markers_.empty()) pending_markers_ += ';';
    pending_markers_ += describe_event(ev);
  }

  void step(std::size_t count = 1) {
    for (std::size_t i = 0; i < count; ++i) {
      state_ = coupled_step(state_, field_, cfg_);
      if (state_.iteration % cfg_.curvature_refresh == 0) refresh_curvature();
      record();
    }
  }

  const FlowState& state() const { return state_; }
  const Telemetry& telemetry() const { return telemetry_; }
  const CurvatureField& curvature() const { return field_; }
  const ControlConfig& config() const { return cfg_; }
  std::size_t iteration() const { return state_.iteration; }

  // Graph carrying the current weights mu_t.
  WeightedGraph current_graph() const { return topology_.with_weights(state_.mu); }
  const WeightedGraph& initial_graph() const { return topology_; }

 private:
  void refresh_curvature() { field_ = engine_.field(current_graph()); }

  void record() {
    TelemetryRow row;
    row.iteration = state_.iteration;
    row.t = state_.t;
    row.H = network_entropy(current_graph(), cfg_.entropy_weighting).network_entropy;
    row.kappa_mean_unweighted = field_.mean_unweighted;
    row.kappa_mean_weighted = field_.mean_mass_weighted;
    ErrorReport err = error_report(state_);
    if (err.sigma_total) row.sigma = *err.sigma_total;
    row.sigma_hat = err.sigma_hat_total.value_or(0.0);
    row.gamma_total = err.gamma_total.value_or(0.0);
    row.v_total = err.v_total.value_or(0.0);
    row.event_marker = std::move(pending_markers_);
    pending_markers_.clear();
    telemetry_.rows.push_back(std::move(row));
  }

  ControlConfig cfg_;
  CurvatureEngine engine_;
  WeightedGraph topology_;
  FlowState state_;
  CurvatureField field_;
  Telemetry telemetry_;
  std::string pending_markers_;
};

// Runs `steps` coupled steps, applying each event before the step of its
// iteration. Events scheduled at or beyond `steps` are not applied.
inline Telemetry simulate(const WeightedGraph& g, const InputSchedule& schedule, const ControlConfig& cfg,
                          std::size_t steps, std::optional<EdgeField> target = std::nullopt) {
  Simulation sim(g, cfg, std::move(target));
  const auto& events = schedule.events();
  std::size_t next = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    while (next < events.size() && events[next].iteration == i) sim.inject(events[next++]);
    sim.step();
  }
  return sim.telemetry();
}

}  // namespace ricci
