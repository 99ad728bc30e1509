#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ricci/demon.hpp"
#include "ricci/simulation.hpp"
#include "support/oracles.hpp"

namespace ricci {
namespace {

FlowState zero_state(const WeightedGraph& g) { return initial_state(g, ControlConfig{}); }

TEST(ApplyEvent, ZeroMagnitudeLeavesLambda) {
  auto g = testing::star_graph(4);
  auto s = apply_event(zero_state(g), {0, TopK{1}, 0.0}, g);
  EXPECT_EQ(s.lambda, EdgeField(4, 0.0));
}

TEST(ApplyEvent, StarCentreTouchesEveryEdge) {
  auto g = testing::star_graph(5);
  auto s = apply_event(zero_state(g), {0, std::vector<std::string>{"0"}, 1.0}, g);
  EXPECT_EQ(s.lambda, EdgeField(5, 1.0));
}

TEST(ApplyEvent, OppositeEventsCancel) {
  auto g = generate_scale_free(50, 2, 2);
  auto s0 = zero_state(g);
  s0.lambda[3] = 0.25;
  auto s = apply_event(apply_event(s0, {10, TopK{1}, 2.0}, g), {11, TopK{1}, -2.0}, g);
  EXPECT_EQ(s.lambda, s0.lambda);
}

TEST(ApplyEvent, OnlyIncidentEdges) {
  auto g = testing::path_graph(5);
  auto s = apply_event(zero_state(g), {0, std::vector<std::string>{"1"}, 2.0}, g);
  EXPECT_EQ(s.lambda, (EdgeField{2.0, 2.0, 0.0, 0.0}));
}

TEST(ApplyEvent, EdgeBetweenTargetsCountedOnce) {
  auto g = testing::path_graph(3);
  auto s = apply_event(zero_state(g), {0, std::vector<std::string>{"0", "1"}, 1.5}, g);
  EXPECT_EQ(s.lambda, (EdgeField{1.5, 1.5}));
}

TEST(ApplyEvent, UnknownNode) {
  auto g = testing::path_graph(3);
  EXPECT_THROW(apply_event(zero_state(g), {0, std::vector<std::string>{"9"}, 1.0}, g), TargetError);
}

TEST(ResolveTargets, Cases) {
  auto star = testing::star_graph(4);
  EXPECT_EQ(resolve_targets(TopK{1}, star), std::vector<NodeId>{0});
  auto g = testing::path_graph(9);
  EXPECT_EQ(resolve_targets(std::vector<std::string>{"3", "7"}, g), (std::vector<NodeId>{3, 7}));
  EXPECT_THROW(resolve_targets(TopK{10}, g), TargetError);
}

TEST(PaperSchedule, Presets) {
  auto full = paper_schedule(PaperPreset::fig2_full);
  ASSERT_EQ(full.events().size(), 4u);
  const std::size_t its[] = {30, 75, 120, 175};
  const double ps[] = {-2, 2, 4, -4};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(full.events()[i].iteration, its[i]);
    EXPECT_EQ(full.events()[i].magnitude, ps[i]);
    EXPECT_EQ(full.events()[i].targets, TargetDirective(TopK{1}));
  }
  EXPECT_EQ(paper_schedule(PaperPreset::fig2_cutoff).events()[2].magnitude, 0.0);
  auto f3 = paper_schedule(PaperPreset::fig3, 5);
  double peak = 0.0;
  for (const auto& e : f3.events()) peak = std::max(peak, e.magnitude);
  EXPECT_EQ(peak, 5.0);
  EXPECT_EQ(f3.events()[2].iteration, 100u);
  EXPECT_THROW(paper_schedule(PaperPreset::fig3, 6), ParameterError);
  EXPECT_THROW(paper_schedule(PaperPreset::fig3, 2.5), ParameterError);
  auto f4 = paper_schedule(PaperPreset::fig4, 5, 8);
  EXPECT_EQ(f4.events()[0].targets, TargetDirective(TopK{8}));
}

TEST(InputSchedule, SortsAndRejectsDuplicates) {
  InputSchedule s({{50, TopK{1}, 1.0}, {10, TopK{1}, 2.0}, {10, TopK{2}, 3.0}});
  EXPECT_EQ(s.events()[0].iteration, 10u);
  EXPECT_EQ(s.events()[0].magnitude, 2.0);
  EXPECT_EQ(s.events()[1].magnitude, 3.0);
  EXPECT_EQ(*s.last_iteration(), 50u);
  EXPECT_THROW(InputSchedule({{10, TopK{1}, 1.0}, {10, TopK{1}, 2.0}}), ParameterError);
  using L = std::vector<std::string>;
  EXPECT_THROW(InputSchedule({{1, L{"a", "b"}, 1.0}, {1, L{"b", "a"}, 2.0}}), ParameterError);
}

TEST(Shorthand, ParsesPaperSchedule) {
  auto s = parse_schedule_shorthand("30:-2,75:2,120:4,175:-4@top1");
  EXPECT_EQ(s, paper_schedule(PaperPreset::fig2_full));
  auto d = parse_schedule_shorthand("5:1.5");
  EXPECT_EQ(d.events()[0].targets, TargetDirective(TopK{1}));
  auto labels = parse_schedule_shorthand("5:1,6:-1@a+b");
  EXPECT_EQ(labels.events()[1].targets, TargetDirective(std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(parse_schedule_shorthand("30-2"), ParseError);
  EXPECT_THROW(parse_schedule_shorthand("x:2"), ParseError);
  EXPECT_THROW(parse_schedule_shorthand("-3:2"), ParseError);
  EXPECT_THROW(parse_schedule_shorthand("3:2@topx"), ParseError);
}

TEST(ScheduleJson, RoundTrip) {
  InputSchedule s({{3, TopK{2}, -1.25}, {7, std::vector<std::string>{"4", "hub"}, 0.1}});
  auto j = schedule_to_json(s);
  EXPECT_EQ(j[1]["targets"][0], 4);
  EXPECT_EQ(j[1]["targets"][1], "hub");
  EXPECT_EQ(schedule_from_json(j), s);
  EXPECT_EQ(schedule_from_json(json("30:-2,75:2,120:4,175:-4")), paper_schedule(PaperPreset::fig2_full));
  EXPECT_THROW(schedule_from_json(json::parse(R"([{"iteration":1,"p":1}])")), ParseError);
  EXPECT_THROW(schedule_from_json(json::parse(R"([{"iteration":1,"p":1,"top_k":1,"targets":[1]}])")), ParseError);
  EXPECT_THROW(schedule_from_json(json::parse(R"([{"iteration":-1,"p":1,"top_k":1}])")), ParseError);
}

TEST(Lambda, AdditiveAndOrderIndependent) {
  std::mt19937_64 rng(51);
  auto g = generate_scale_free(40, 2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<InputEvent> evs;
    for (int k = 0; k < 5; ++k) {
      std::vector<std::string> labels{std::to_string(std::uniform_int_distribution<int>(0, 39)(rng))};
      evs.push_back({0, labels, std::uniform_int_distribution<int>(-4, 4)(rng) * 0.5});
    }
    EdgeField expected(g.edge_count(), 0.0);
    for (const auto& ev : evs) {
      auto inc = apply_event(zero_state(g), ev, g).lambda;
      for (std::size_t e = 0; e < expected.size(); ++e) expected[e] += inc[e];
    }
    std::sort(evs.begin(), evs.end(), [](const InputEvent& a, const InputEvent& b) { return a.magnitude < b.magnitude; });
    do {
      auto s = zero_state(g);
      for (const auto& ev : evs) s = apply_event(s, ev, g);
      // Half-integer increments sum exactly in any order.
      EXPECT_EQ(s.lambda, expected);
    } while (std::next_permutation(evs.begin(), evs.end(), [](const InputEvent& a, const InputEvent& b) {
      return a.magnitude < b.magnitude;
    }));
  }
}

TEST(Lambda, AllZeroScheduleMatchesBaselineBitExact) {
  auto g = generate_scale_free(60, 2, 5);
  auto zero = paper_schedule(PaperPreset::fig2_full);
  std::vector<InputEvent> evs = zero.events();
  for (auto& e : evs) e.magnitude = 0.0;
  auto with = simulate(g, InputSchedule(evs), ControlConfig{}, 200);
  auto base = simulate(g, InputSchedule{}, ControlConfig{}, 200);
  ASSERT_EQ(with.rows.size(), base.rows.size());
  for (std::size_t i = 0; i < base.rows.size(); ++i) {
    EXPECT_EQ(with.rows[i].H, base.rows[i].H);
    EXPECT_EQ(with.rows[i].kappa_mean_unweighted, base.rows[i].kappa_mean_unweighted);
    EXPECT_EQ(with.rows[i].v_total, base.rows[i].v_total);
  }
}

TEST(Describe, Markers) {
  EXPECT_EQ(describe_event({0, TopK{1}, -2.0}), "-2@top1");
  EXPECT_EQ(describe_event({0, std::vector<std::string>{"a", "b"}, 0.5}), "0.5@a+b");
}

}  // namespace
}  // namespace ricci
