#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ricci/demon.hpp"
#include "ricci/errors.hpp"
#include "ricci/flow.hpp"
#include "ricci/graph.hpp"
#include "ricci/graph_io.hpp"
#include "ricci/simulation.hpp"
#include "ricci/telemetry_io.hpp"

namespace ricci {

struct GeneratorParams {
  std::size_t n = 200;
  std::size_t m = 2;
  std::uint64_t seed = 1;
};

struct GraphFile {
  std::string path;
};

// Where the initial network comes from: a seeded scale-free generator, a
// graph file, or an inline JSON graph (what manifests store for files).
struct NetworkSource {
  std::variant<GeneratorParams, GraphFile, WeightedGraph> source = GeneratorParams{};

  WeightedGraph build() const {
    if (const auto* gen = std::get_if<GeneratorParams>(&source)) return generate_scale_free(gen->n, gen->m, gen->seed);
    if (const auto* file = std::get_if<GraphFile>(&source)) return load_graph(file->path);
    return std::get<WeightedGraph>(source);
  }
};

struct OutputSpec {
  std::string path;  // directory; empty means no files
  bool csv = true;
  bool json = true;
};

struct ExperimentSpec {
  std::string name = "run";
  NetworkSource network;
  InputSchedule schedule;
  ControlConfig cfg;
  std::size_t steps = 250;
  OutputSpec output;

  void validate() const {
    cfg.validate();
    if (!(cfg.dt > 0.0)) throw ParameterError("dt must be positive");
    if (auto last = schedule.last_iteration(); last && *last > steps)
      throw ParameterError("steps must cover the last scheduled event");
  }
};

// --- config / spec JSON -------------------------------------------------

inline json config_to_json(const ControlConfig& c) {
  return {{"beta_sq", c.beta_sq},
          {"dt", c.dt},
          {"normalization", c.normalization == Normalization::global ? "global" : "none"},
          {"sign_convention", c.sign_convention == SignConvention::proof ? "proof" : "as_printed"},
          {"curvature_refresh", c.curvature_refresh},
          {"entropy_weighting", c.entropy_weighting == EntropyWeighting::stationary ? "stationary" : "uniform"}};
}

namespace detail {

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

// JSON built in C++ stores small integers as signed, parsed text as unsigned.
inline bool is_nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

inline std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!is_nonnegative_integer(j[key])) throw ParseError(std::string("field '") + key + "' must be a nonnegative integer");
  return j[key].get<std::size_t>();
}

template <typename E>
E get_enum(const json& j, const char* key, E fallback, std::initializer_list<std::pair<const char*, E>> names) {
  if (!j.contains(key)) return fallback;
  auto s = get_field<std::string>(j, key, "");
  for (const auto& [name, value] : names)
    if (s == name) return value;
  throw ParseError(std::string("field '") + key + "' has unknown value '" + s + "'");
}

}  // namespace detail

inline ControlConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config must be an object");
  ControlConfig c;
  c.beta_sq = detail::get_field<double>(j, "beta_sq", c.beta_sq);
  c.dt = detail::get_field<double>(j, "dt", c.dt);
  c.normalization = detail::get_enum(j, "normalization", c.normalization,
                                     {{"global", Normalization::global}, {"none", Normalization::none}});
  c.sign_convention = detail::get_enum(j, "sign_convention", c.sign_convention,
                                       {{"proof", SignConvention::proof}, {"as_printed", SignConvention::as_printed}});
  c.curvature_refresh = detail::get_count(j, "curvature_refresh", c.curvature_refresh);
  c.entropy_weighting = detail::get_enum(j, "entropy_weighting", c.entropy_weighting,
                                         {{"stationary", EntropyWeighting::stationary},
                                          {"uniform", EntropyWeighting::uniform}});
  c.validate();
  return c;
}

inline json network_to_json(const NetworkSource& n) {
  if (const auto* gen = std::get_if<GeneratorParams>(&n.source))
    return {{"generator", "scale_free"}, {"n", gen->n}, {"m", gen->m}, {"seed", gen->seed}};
  if (const auto* file = std::get_if<GraphFile>(&n.source)) return {{"file", file->path}};
  return {{"graph", graph_to_json(std::get<WeightedGraph>(n.source))}};
}

inline NetworkSource network_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("network must be an object");
  NetworkSource n;
  if (j.contains("graph")) {
    n.source = graph_from_json(j["graph"]);
  } else if (j.contains("file")) {
    n.source = GraphFile{detail::get_field<std::string>(j, "file", "")};
  } else {
    auto kind = detail::get_field<std::string>(j, "generator", "scale_free");
    if (kind != "scale_free") throw ParseError("unknown generator '" + kind + "'");
    GeneratorParams p;
    p.n = detail::get_count(j, "n", p.n);
    p.m = detail::get_count(j, "m", p.m);
    if (j.contains("seed") && !detail::is_nonnegative_integer(j["seed"])) throw ParseError("'seed' must be a nonnegative integer");
    p.seed = detail::get_field<std::uint64_t>(j, "seed", p.seed);
    if (p.m < 1 || p.n <= p.m) throw ParameterError("scale-free generator needs n > m >= 1");
    n.source = p;
  }
  return n;
}

inline InputSchedule schedule_spec_from_json(const json& j) {
  if (j.is_object()) {
    auto preset = detail::get_field<std::string>(j, "preset", "");
    const double theta = detail::get_field<double>(j, "theta", 5.0);
    const std::size_t k = detail::get_count(j, "top_k", 1);
    if (preset == "fig2_full") return paper_schedule(PaperPreset::fig2_full);
    if (preset == "fig2_cutoff") return paper_schedule(PaperPreset::fig2_cutoff);
    if (preset == "fig3") return paper_schedule(PaperPreset::fig3, theta);
    if (preset == "fig4") return paper_schedule(PaperPreset::fig4, 0.0, k);
    throw ParseError("unknown schedule preset '" + preset + "'");
  }
  return schedule_from_json(j);
}

inline json spec_to_json(const ExperimentSpec& s) {
  return {{"name", s.name},
          {"network", network_to_json(s.network)},
          {"schedule", schedule_to_json(s.schedule)},
          {"config", config_to_json(s.cfg)},
          {"steps", s.steps},
          {"output", {{"path", s.output.path}, {"csv", s.output.csv}, {"json", s.output.json}}}};
}

inline ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("experiment spec must be a JSON object");
  ExperimentSpec s;
  s.name = detail::get_field<std::string>(j, "name", s.name);
  if (j.contains("network")) s.network = network_from_json(j["network"]);
  if (j.contains("schedule")) s.schedule = schedule_spec_from_json(j["schedule"]);
  if (j.contains("config")) s.cfg = config_from_json(j["config"]);
  s.steps = detail::get_count(j, "steps", s.steps);
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (o.is_string()) {
      s.output.path = o.get<std::string>();
    } else if (o.is_object()) {
      s.output.path = detail::get_field<std::string>(o, "path", "");
      s.output.csv = detail::get_field<bool>(o, "csv", true);
      s.output.json = detail::get_field<bool>(o, "json", true);
    } else {
      throw ParseError("output must be a path or an object");
    }
  }
  s.validate();
  return s;
}

// --- files ----------------------------------------------------------------

// Writes through a sibling temporary and renames it into place, so readers
// never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for '" + path.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

struct ExperimentResult {
  Telemetry telemetry;
  json manifest;
};

// Everything needed for a bit-exact replay; graph files are inlined so the
// replay does not depend on them.
inline json make_manifest(const ExperimentSpec& spec, const WeightedGraph& g) {
  ExperimentSpec resolved = spec;
  if (std::holds_alternative<GraphFile>(spec.network.source)) resolved.network.source = g;
  json m = spec_to_json(resolved);
  m["format_version"] = 1;
  return m;
}

inline std::string telemetry_csv_text(const Telemetry& tel) {
  std::ostringstream out;
  write_telemetry_csv(out, tel);
  return out.str();
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  WeightedGraph g = spec.network.build();
  ExperimentResult r;
  r.manifest = make_manifest(spec, g);
  r.telemetry = simulate(g, spec.schedule, spec.cfg, spec.steps);
  if (!spec.output.path.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(spec.output.path);
    std::vector<std::pair<fs::path, std::string>> files;
    if (spec.output.csv) files.emplace_back(dir / "telemetry.csv", telemetry_csv_text(r.telemetry));
    if (spec.output.json) files.emplace_back(dir / "telemetry.json", telemetry_to_json(r.telemetry).dump(1) + "\n");
    files.emplace_back(dir / "manifest.json", r.manifest.dump(2) + "\n");
    for (const auto& [path, text] : files) write_file_atomic(path, text);
  }
  return r;
}

// --- presets --------------------------------------------------------------

struct PresetOverrides {
  std::optional<std::size_t> n, m, steps;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta_sq, dt;
  std::string out;  // parent directory for the variants
};

// Variants reproducing the published experiments:
//   fig2: full and cutoff schedules (n = 200, 250 steps)
//   fig3: theta = 1..5 (n = 200, 300 steps)
//   fig4 / fig5: top-k in {1, 2, 4, 8} (n = 400, 300 steps; fig5 plots the
//   Type I / II columns of the same runs)
// Single variants are addressable as fig2_full, fig2_cutoff, fig3_theta<k>,
// fig4_top<k>.
inline std::vector<ExperimentSpec> preset_specs(const std::string& preset, const PresetOverrides& o = {}) {
  std::vector<std::pair<std::string, InputSchedule>> variants;
  std::size_t n = 200, steps = 250;
  auto add_fig3 = [&](int theta) {
    variants.emplace_back("fig3_theta" + std::to_string(theta), paper_schedule(PaperPreset::fig3, theta));
  };
  auto add_fig4 = [&](std::size_t k) {
    variants.emplace_back("fig4_top" + std::to_string(k), paper_schedule(PaperPreset::fig4, 0.0, k));
  };
  if (preset == "fig2" || preset == "fig2_full" || preset == "fig2_cutoff") {
    if (preset != "fig2_cutoff") variants.emplace_back("fig2_full", paper_schedule(PaperPreset::fig2_full));
    if (preset != "fig2_full") variants.emplace_back("fig2_cutoff", paper_schedule(PaperPreset::fig2_cutoff));
  } else if (preset == "fig3") {
    steps = 300;
    for (int theta = 1; theta <= 5; ++theta) add_fig3(theta);
  } else if (preset.rfind("fig3_theta", 0) == 0 && preset.size() == 11 && preset[10] >= '1' && preset[10] <= '5') {
    steps = 300;
    add_fig3(preset[10] - '0');
  } else if (preset == "fig4" || preset == "fig5") {
    n = 400;
    steps = 300;
    for (std::size_t k : {1, 2, 4, 8}) add_fig4(k);
  } else if (preset.rfind("fig4_top", 0) == 0 && preset.size() > 8) {
    n = 400;
    steps = 300;
    try {
      add_fig4(std::stoul(preset.substr(8)));
    } catch (const std::exception&) {
      throw ParameterError("bad preset '" + preset + "'");
    }
  } else {
    throw ParameterError("unknown preset '" + preset + "' (fig2, fig2_full, fig2_cutoff, fig3, fig4, fig5)");
  }

  std::vector<ExperimentSpec> out;
  for (auto& [name, schedule] : variants) {
    ExperimentSpec s;
    s.name = name;
    s.network.source = GeneratorParams{o.n.value_or(n), o.m.value_or(2), o.seed.value_or(1)};
    s.schedule = std::move(schedule);
    if (o.beta_sq) s.cfg.beta_sq = *o.beta_sq;
    if (o.dt) s.cfg.dt = *o.dt;
    s.steps = o.steps.value_or(steps);
    if (!o.out.empty()) s.output.path = (std::filesystem::path(o.out) / name).string();
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ricci
