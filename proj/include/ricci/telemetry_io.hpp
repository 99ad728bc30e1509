#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ricci/errors.hpp"
#include "ricci/graph_io.hpp"
#include "ricci/simulation.hpp"

namespace ricci {

inline constexpr const char* kTelemetryColumns[] = {
    "iteration", "t", "H", "kappa_mean_unweighted", "kappa_mean_weighted",
    "sigma", "sigma_hat", "gamma_total", "v_total", "event_marker"};

// 12 significant digits; NaN prints as "nan".
inline std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// The double the 12-digit text reads back to, so JSON carries the same
// decimal as CSV.
inline double rounded_value(double x) { return std::strtod(format_value(x).c_str(), nullptr); }

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
    throw ParseError("telemetry line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_telemetry_csv(std::ostream& out, const Telemetry& tel) {
  for (std::size_t i = 0; i < std::size(kTelemetryColumns); ++i)
    out << (i ? "," : "") << kTelemetryColumns[i];
  out << '\n';
  for (const auto& r : tel.rows) {
    out << r.iteration << ',' << format_value(r.t) << ',' << format_value(r.H) << ','
        << format_value(r.kappa_mean_unweighted) << ',' << format_value(r.kappa_mean_weighted) << ','
        << format_value(r.sigma) << ',' << format_value(r.sigma_hat) << ',' << format_value(r.gamma_total)
        << ',' << format_value(r.v_total) << ',' << detail::csv_quote(r.event_marker) << '\n';
  }
}

inline Telemetry read_telemetry_csv(std::istream& in) {
  Telemetry tel;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("telemetry file is empty");
  auto header = detail::csv_split(line);
  if (header.size() != std::size(kTelemetryColumns)) throw ParseError("unexpected telemetry header");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != kTelemetryColumns[i]) throw ParseError("unexpected telemetry column '" + header[i] + "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::csv_split(line);
    if (f.size() != header.size())
      throw ParseError("telemetry line " + std::to_string(line_no) + ": expected 10 fields");
    TelemetryRow r;
    double it = detail::parse_number(f[0], line_no);
    if (it < 0 || it != std::floor(it)) throw ParseError("telemetry line " + std::to_string(line_no) + ": bad iteration");
    r.iteration = static_cast<std::size_t>(it);
    r.t = detail::parse_number(f[1], line_no);
    r.H = detail::parse_number(f[2], line_no);
    r.kappa_mean_unweighted = detail::parse_number(f[3], line_no);
    r.kappa_mean_weighted = detail::parse_number(f[4], line_no);
    r.sigma = detail::parse_number(f[5], line_no);
    r.sigma_hat = detail::parse_number(f[6], line_no);
    r.gamma_total = detail::parse_number(f[7], line_no);
    r.v_total = detail::parse_number(f[8], line_no);
    r.event_marker = f[9];
    tel.rows.push_back(std::move(r));
  }
  return tel;
}

inline json row_to_json(const TelemetryRow& r) {
  auto num = [](double x) -> json { return std::isnan(x) ? json(nullptr) : json(rounded_value(x)); };
  return {{"iteration", r.iteration},
          {"t", num(r.t)},
          {"H", num(r.H)},
          {"kappa_mean_unweighted", num(r.kappa_mean_unweighted)},
          {"kappa_mean_weighted", num(r.kappa_mean_weighted)},
          {"sigma", num(r.sigma)},
          {"sigma_hat", num(r.sigma_hat)},
          {"gamma_total", num(r.gamma_total)},
          {"v_total", num(r.v_total)},
          {"event_marker", r.event_marker}};
}

inline TelemetryRow row_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("telemetry rows must be objects");
  auto num = [&](const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("telemetry row lacks '") + key + "'");
    const auto& v = j[key];
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw ParseError(std::string("telemetry field '") + key + "' is not a number");
    return v.get<double>();
  };
  TelemetryRow r;
  if (!j.contains("iteration") || !(j["iteration"].is_number_unsigned() || (j["iteration"].is_number_integer() && j["iteration"].get<long long>() >= 0)))
    throw ParseError("telemetry row needs a nonnegative 'iteration'");
  r.iteration = j["iteration"].get<std::size_t>();
  r.t = num("t");
  r.H = num("H");
  r.kappa_mean_unweighted = num("kappa_mean_unweighted");
  r.kappa_mean_weighted = num("kappa_mean_weighted");
  r.sigma = num("sigma");
  r.sigma_hat = num("sigma_hat");
  r.gamma_total = num("gamma_total");
  r.v_total = num("v_total");
  if (j.contains("event_marker")) {
    if (!j["event_marker"].is_string()) throw ParseError("'event_marker' must be a string");
    r.event_marker = j["event_marker"].get<std::string>();
  }
  return r;
}

inline json telemetry_to_json(const Telemetry& tel) {
  json rows = json::array();
  for (const auto& r : tel.rows) rows.push_back(row_to_json(r));
  return rows;
}

inline Telemetry telemetry_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("telemetry JSON must be an array of rows");
  Telemetry tel;
  for (const auto& r : j) tel.rows.push_back(row_from_json(r));
  return tel;
}

// `.json` files hold the JSON layout, anything else CSV.
inline Telemetry load_telemetry(const std::string& path) {
  std::string text = read_text_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return telemetry_from_json(parse_json_text(text, path));
  std::istringstream in(text);
  return read_telemetry_csv(in);
}

struct EventWindow {
  std::size_t iteration = 0;  // row carrying the marker
  std::string marker;
  double mean_H_before = 0.0;
  double mean_H_after = 0.0;
  double mean_kappa_before = 0.0;
  double mean_kappa_after = 0.0;
};

struct AnalysisSummary {
  std::size_t qualifying_steps = 0;
  std::size_t agreeing_steps = 0;
  std::optional<double> agreement_fraction;  // empty when nothing qualifies
  std::vector<EventWindow> windows;
};

struct AnalysisOptions {
  double noise_floor = 1e-6;
  std::size_t window = 10;
  bool weighted_kappa = false;
};

// Fraction of steps where H and mean kappa move in the same direction,
// among steps whose |delta kappa| exceeds the noise floor; plus the mean H
// and kappa over `window` rows before and from each marked row.
inline AnalysisSummary analyze(const Telemetry& tel, const AnalysisOptions& opt = {}) {
  AnalysisSummary s;
  const auto& rows = tel.rows;
  auto kappa = [&](std::size_t i) {
    return opt.weighted_kappa ? rows[i].kappa_mean_weighted : rows[i].kappa_mean_unweighted;
  };
  auto sign = [](double x) { return (x > 0.0) - (x < 0.0); };
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double dk = kappa(i + 1) - kappa(i);
    const double dh = rows[i + 1].H - rows[i].H;
    if (!(std::abs(dk) > opt.noise_floor)) continue;
    ++s.qualifying_steps;
    if (sign(dh) == sign(dk)) ++s.agreeing_steps;
  }
  if (s.qualifying_steps > 0)
    s.agreement_fraction = static_cast<double>(s.agreeing_steps) / static_cast<double>(s.qualifying_steps);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].event_marker.empty()) continue;
    EventWindow w;
    w.iteration = rows[i].iteration;
    w.marker = rows[i].event_marker;
    auto mean = [&](std::size_t b, std::size_t e, bool h) {
      if (b >= e) return std::numeric_limits<double>::quiet_NaN();
      double acc = 0.0;
      for (std::size_t k = b; k < e; ++k) acc += h ? rows[k].H : kappa(k);
      return acc / static_cast<double>(e - b);
    };
    const std::size_t before = i >= opt.window ? i - opt.window : 0;
    const std::size_t after = std::min(rows.size(), i + opt.window);
    w.mean_H_before = mean(before, i, true);
    w.mean_H_after = mean(i, after, true);
    w.mean_kappa_before = mean(before, i, false);
    w.mean_kappa_after = mean(i, after, false);
    s.windows.push_back(std::move(w));
  }
  return s;
}

inline json summary_to_json(const AnalysisSummary& s) {
  auto num = [](double x) -> json { return std::isnan(x) ? json(nullptr) : json(rounded_value(x)); };
  json windows = json::array();
  for (const auto& w : s.windows)
    windows.push_back({{"iteration", w.iteration},
                       {"event_marker", w.marker},
                       {"mean_H_before", num(w.mean_H_before)},
                       {"mean_H_after", num(w.mean_H_after)},
                       {"mean_kappa_before", num(w.mean_kappa_before)},
                       {"mean_kappa_after", num(w.mean_kappa_after)}});
  return {{"qualifying_steps", s.qualifying_steps},
          {"agreeing_steps", s.agreeing_steps},
          {"sign_agreement", s.agreement_fraction ? json(rounded_value(*s.agreement_fraction)) : json("NA")},
          {"event_windows", std::move(windows)}};
}

}  // namespace ricci
