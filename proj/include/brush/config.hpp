// Key-value run configuration: `key = value` lines, '#' comments, dotted keys
// for grouping, space-separated lists, and (x,y) pairs for polygons. The
// schema is documented in docs/config_format.md.
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "brush/expr.hpp"
#include "brush/geometry.hpp"

namespace brush {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      c.values_[key] = value;
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream in(get_string(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
    return out;
  }

  std::vector<Point> get_points(const std::string& key) const {
    std::istringstream in(get_string(key));
    std::vector<Point> out;
    std::string tok;
    while (in >> tok) {
      if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')')
        throw ConfigError("config key '" + key +
                          "': expected (x,y) pairs, got '" + tok + "'");
      size_t comma = tok.find(',');
      if (comma == std::string::npos)
        throw ConfigError("config key '" + key + "': malformed pair " + tok);
      out.push_back({parse_double(key, tok.substr(1, comma - 1)),
                     parse_double(key, tok.substr(comma + 1,
                                                  tok.size() - comma - 2))});
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& tok) {
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: '" + tok +
                        "'");
    }
  }

  std::map<std::string, std::string> values_;
};

// Everything a pipeline run needs, resolved from a Config.
struct RunConfig {
  ModelTooth tooth;
  Rect base;
  double attach_lo = 0.0, attach_hi = 1.0;
  std::string family;  // periodic | linear-gaps | single
  double fill = 0.5;
  std::vector<double> epsilons;
  Expr source = Expr(1.0);
  std::string source_text = "1";
  double h_base = 1.0 / 32;
  double h_tooth = 1.0 / 16;
  double h_y = 1.0 / 32;
  double cg_tol = 1e-10;
  std::string theta_mode = "exact";  // exact | empirical
  double theta_window = 1.0 / 16;
  double theta_min = 1e-12;

  BrushSpec make_spec(double eps) const {
    if (family == "periodic")
      return place_periodic(base, attach_lo, attach_hi, eps, fill, tooth);
    if (family == "linear-gaps") return place_linear_gaps(base, eps, tooth);
    if (family == "single")
      return place_single(base, attach_lo, attach_hi, eps, tooth);
    throw ConfigError("unknown placement family '" + family + "'");
  }
};

inline ModelTooth tooth_from_config(const Config& c) {
  std::string preset = c.get_string("tooth", "");
  if (preset == "cylinder") return cylinder_tooth(c.get_double("tooth.height", 1.0));
  if (preset == "branching") return branching_tooth();
  if (preset == "branching-unit") return branching_tooth_unit();
  if (preset == "tee") return tee_tooth();
  if (!preset.empty())
    throw ConfigError("unknown tooth preset '" + preset + "'");
  ModelTooth t;
  t.polygon = c.get_points("tooth.polygon");
  std::vector<double> omega = c.get_doubles("tooth.omega");
  if (omega.size() != 2)
    throw ConfigError("tooth.omega must be two numbers");
  t.base_lo = omega[0];
  t.base_hi = omega[1];
  t.height = c.get_double("tooth.height");
  t.r1 = c.get_double("tooth.r1");
  t.delta0 = c.get_double("tooth.delta0");
  return t;
}

inline RunConfig run_config_from(const Config& c) {
  RunConfig rc;
  rc.tooth = tooth_from_config(c);
  std::vector<double> rect = c.has("base.rect")
                                 ? c.get_doubles("base.rect")
                                 : std::vector<double>{0.0, 1.0, -1.0, 0.0};
  if (rect.size() != 4)
    throw ConfigError("base.rect must be 'x0 x1 y0 y1'");
  rc.base = {rect[0], rect[1], rect[2], rect[3]};
  if (c.has("base.attach")) {
    std::vector<double> a = c.get_doubles("base.attach");
    if (a.size() != 2) throw ConfigError("base.attach must be two numbers");
    rc.attach_lo = a[0];
    rc.attach_hi = a[1];
  } else {
    rc.attach_lo = rc.base.x0;
    rc.attach_hi = rc.base.x1;
  }
  rc.family = c.get_string("family", "periodic");
  rc.fill = c.get_double("fill", 0.5);
  if (c.has("epsilons"))
    rc.epsilons = c.get_doubles("epsilons");
  else if (c.has("epsilon"))
    rc.epsilons = {c.get_double("epsilon")};
  else
    throw ConfigError("missing 'epsilon' or 'epsilons'");
  rc.source_text = c.get_string("f", "1");
  try {
    rc.source = Expr::parse(rc.source_text);
  } catch (const ExprError& e) {
    throw ConfigError(std::string("bad source expression: ") + e.what());
  }
  rc.h_base = c.get_double("h.base", rc.h_base);
  rc.h_tooth = c.get_double("h.tooth", rc.h_tooth);
  rc.h_y = c.get_double("h.y", rc.h_y);
  rc.cg_tol = c.get_double("cg.tol", rc.cg_tol);
  rc.theta_mode = c.get_string("theta.mode", rc.theta_mode);
  if (rc.theta_mode != "exact" && rc.theta_mode != "empirical")
    throw ConfigError("theta.mode must be 'exact' or 'empirical'");
  rc.theta_window = c.get_double("theta.window", rc.theta_window);
  rc.theta_min = c.get_double(
      "theta.min", rc.theta_mode == "exact" ? 1e-12 : 1e-3);
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from(Config::from_file(path));
}

}  // namespace brush
