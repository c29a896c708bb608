// Line-based "key = value" run configuration with optional [section]
// headers. Unknown keys are hard errors so a typo cannot silently change a
// reproduction run; every field has a documented default matching the
// reference experiment settings (square side 10, eta 2, f = 2x1 + 3x2,
// K = 1.5^j for j = 0..9).

#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace calderon {

struct config_error : std::runtime_error {
  int line;
  config_error(int line_no, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

struct RunConfig {
  // sweep
  std::string family = "both";  // parabolic | hyperbolic | both
  double k_base = 1.5;
  int k_count = 10;
  std::vector<double> k_values;  // overrides k_base/k_count when set
  int mesh_level = 2;
  bool stability_check = true;  // re-run one level coarser and gate |d mu|
  double eta = 2.0;
  double hyperbola_a = 1.0;
  double side = 10.0;
  double grading = 1.2;
  std::string dirichlet = "affine";  // affine: f = 2 x1 + 3 x2
  double cg_tol = 1e-10;
  int cg_max_iters = 200000;
  int threads = 1;
  // converge
  double radius = 1.0;
  int levels = 3;
  // compare
  double cap_k = 1.0;
  double cap_height = 2.0;
  double cap_x = 0.0;
  double cap_y = -1.0;
  double cap_offset = 0.5;
  double eta_tilde = 3.0;
  std::string gamma0 = "bottom";
  // verify / identity
  double tau = 8.0;
  double window_b = 0.9;
  double window_h = 0.4;
  double oracle_radius = 1.0;
  double quad_tol = 1e-8;
  // bound
  double mu = 0.1;
  double alpha = 1.0;
  double delta = 1.0;
  double bound_k_min = 10.0;
  double bound_k_max = 1e6;
  int bound_points = 6;
  // output
  std::string out_dir = "out";

  std::vector<double> effective_k_values() const {
    if (!k_values.empty()) return k_values;
    std::vector<double> ks(k_count);
    for (int j = 0; j < k_count; ++j) ks[j] = std::pow(k_base, j);
    return ks;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
  std::size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw config_error(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw config_error(line, "trailing characters in number '" + v + "'");
  return d;
}

inline int parse_int(const std::string& v, int line) {
  std::size_t pos = 0;
  int n;
  try {
    n = std::stoi(v, &pos);
  } catch (const std::exception&) {
    throw config_error(line, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw config_error(line, "trailing characters in integer '" + v + "'");
  return n;
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error(line, "expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw config_error(line, "empty entry in list");
    out.push_back(parse_double(item, line));
  }
  if (out.empty()) throw config_error(line, "empty list");
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line[0] == '[') {
      if (line.back() != ']') throw config_error(line_no, "unterminated section header");
      continue;  // sections are organizational only
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw config_error(line_no, "expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw config_error(line_no, "empty key");
    if (value.empty()) throw config_error(line_no, "empty value for '" + key + "'");

    using namespace detail;
    if (key == "family") {
      if (value != "parabolic" && value != "hyperbolic" && value != "both")
        throw config_error(line_no, "family must be parabolic, hyperbolic, or both");
      cfg.family = value;
    } else if (key == "k_base") {
      cfg.k_base = parse_double(value, line_no);
      if (!(cfg.k_base > 1.0)) throw config_error(line_no, "k_base must exceed 1");
    } else if (key == "k_count") {
      cfg.k_count = parse_int(value, line_no);
      if (cfg.k_count < 2) throw config_error(line_no, "k_count must be at least 2");
    } else if (key == "k_values") {
      cfg.k_values = parse_double_list(value, line_no);
    } else if (key == "mesh_level") {
      cfg.mesh_level = parse_int(value, line_no);
      if (cfg.mesh_level < 1 || cfg.mesh_level > 5)
        throw config_error(line_no, "mesh_level must lie in 1..5");
    } else if (key == "stability_check") {
      cfg.stability_check = parse_bool(value, line_no);
    } else if (key == "eta") {
      cfg.eta = parse_double(value, line_no);
      if (!(cfg.eta > 0)) throw config_error(line_no, "eta must be positive");
    } else if (key == "hyperbola_a") {
      cfg.hyperbola_a = parse_double(value, line_no);
      if (!(cfg.hyperbola_a > 0)) throw config_error(line_no, "hyperbola_a must be positive");
    } else if (key == "side") {
      cfg.side = parse_double(value, line_no);
      if (!(cfg.side > 0)) throw config_error(line_no, "side must be positive");
    } else if (key == "grading") {
      cfg.grading = parse_double(value, line_no);
      if (!(cfg.grading >= 1.0)) throw config_error(line_no, "grading must be >= 1");
    } else if (key == "dirichlet") {
      if (value != "affine" && value != "zero")
        throw config_error(line_no, "dirichlet must be affine or zero");
      cfg.dirichlet = value;
    } else if (key == "cg_tol") {
      cfg.cg_tol = parse_double(value, line_no);
      if (!(cfg.cg_tol > 0) || cfg.cg_tol > 1e-4)
        throw config_error(line_no, "cg_tol must lie in (0, 1e-4]");
    } else if (key == "cg_max_iters") {
      cfg.cg_max_iters = parse_int(value, line_no);
      if (cfg.cg_max_iters < 1) throw config_error(line_no, "cg_max_iters must be positive");
    } else if (key == "threads") {
      cfg.threads = parse_int(value, line_no);
      if (cfg.threads < 1) throw config_error(line_no, "threads must be positive");
    } else if (key == "radius") {
      cfg.radius = parse_double(value, line_no);
      if (!(cfg.radius > 0)) throw config_error(line_no, "radius must be positive");
    } else if (key == "levels") {
      cfg.levels = parse_int(value, line_no);
      if (cfg.levels < 3) throw config_error(line_no, "levels must be at least 3");
    } else if (key == "cap_k") {
      cfg.cap_k = parse_double(value, line_no);
      if (!(cfg.cap_k > 0)) throw config_error(line_no, "cap_k must be positive");
    } else if (key == "cap_height") {
      cfg.cap_height = parse_double(value, line_no);
      if (!(cfg.cap_height > 0)) throw config_error(line_no, "cap_height must be positive");
    } else if (key == "cap_x") {
      cfg.cap_x = parse_double(value, line_no);
    } else if (key == "cap_y") {
      cfg.cap_y = parse_double(value, line_no);
    } else if (key == "cap_offset") {
      cfg.cap_offset = parse_double(value, line_no);
    } else if (key == "eta_tilde") {
      cfg.eta_tilde = parse_double(value, line_no);
      if (!(cfg.eta_tilde > 0)) throw config_error(line_no, "eta_tilde must be positive");
    } else if (key == "gamma0") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item != "bottom" && item != "top" && item != "left" && item != "right")
          throw config_error(line_no, "gamma0 entries must be bottom/top/left/right");
      }
      cfg.gamma0 = value;
    } else if (key == "tau") {
      cfg.tau = parse_double(value, line_no);
      if (!(cfg.tau > 0)) throw config_error(line_no, "tau must be positive");
    } else if (key == "window_b") {
      cfg.window_b = parse_double(value, line_no);
      if (!(cfg.window_b > 0)) throw config_error(line_no, "window_b must be positive");
    } else if (key == "window_h") {
      cfg.window_h = parse_double(value, line_no);
      if (!(cfg.window_h > 0)) throw config_error(line_no, "window_h must be positive");
    } else if (key == "oracle_radius") {
      cfg.oracle_radius = parse_double(value, line_no);
      if (!(cfg.oracle_radius > 0)) throw config_error(line_no, "oracle_radius must be positive");
    } else if (key == "quad_tol") {
      cfg.quad_tol = parse_double(value, line_no);
      if (!(cfg.quad_tol > 0)) throw config_error(line_no, "quad_tol must be positive");
    } else if (key == "mu") {
      cfg.mu = parse_double(value, line_no);
    } else if (key == "alpha") {
      cfg.alpha = parse_double(value, line_no);
    } else if (key == "delta") {
      cfg.delta = parse_double(value, line_no);
    } else if (key == "bound_k_min") {
      cfg.bound_k_min = parse_double(value, line_no);
      if (!(cfg.bound_k_min > 1)) throw config_error(line_no, "bound_k_min must exceed 1");
    } else if (key == "bound_k_max") {
      cfg.bound_k_max = parse_double(value, line_no);
    } else if (key == "bound_points") {
      cfg.bound_points = parse_int(value, line_no);
      if (cfg.bound_points < 2) throw config_error(line_no, "bound_points must be at least 2");
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      throw config_error(line_no, "unknown key '" + key + "'");
    }
  }
  if (cfg.bound_k_max <= cfg.bound_k_min)
    throw config_error(line_no, "bound_k_max must exceed bound_k_min");
  return cfg;
}

// Canonical echo of every key; parsing the echo reproduces the config.
inline std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "family = " << cfg.family << "\n";
  os << "k_base = " << num(cfg.k_base) << "\n";
  os << "k_count = " << cfg.k_count << "\n";
  if (!cfg.k_values.empty()) {
    os << "k_values = ";
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i)
      os << (i ? "," : "") << num(cfg.k_values[i]);
    os << "\n";
  }
  os << "mesh_level = " << cfg.mesh_level << "\n";
  os << "stability_check = " << (cfg.stability_check ? "true" : "false") << "\n";
  os << "eta = " << num(cfg.eta) << "\n";
  os << "hyperbola_a = " << num(cfg.hyperbola_a) << "\n";
  os << "side = " << num(cfg.side) << "\n";
  os << "grading = " << num(cfg.grading) << "\n";
  os << "dirichlet = " << cfg.dirichlet << "\n";
  os << "cg_tol = " << num(cfg.cg_tol) << "\n";
  os << "cg_max_iters = " << cfg.cg_max_iters << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "radius = " << num(cfg.radius) << "\n";
  os << "levels = " << cfg.levels << "\n";
  os << "cap_k = " << num(cfg.cap_k) << "\n";
  os << "cap_height = " << num(cfg.cap_height) << "\n";
  os << "cap_x = " << num(cfg.cap_x) << "\n";
  os << "cap_y = " << num(cfg.cap_y) << "\n";
  os << "cap_offset = " << num(cfg.cap_offset) << "\n";
  os << "eta_tilde = " << num(cfg.eta_tilde) << "\n";
  os << "gamma0 = " << cfg.gamma0 << "\n";
  os << "tau = " << num(cfg.tau) << "\n";
  os << "window_b = " << num(cfg.window_b) << "\n";
  os << "window_h = " << num(cfg.window_h) << "\n";
  os << "oracle_radius = " << num(cfg.oracle_radius) << "\n";
  os << "quad_tol = " << num(cfg.quad_tol) << "\n";
  os << "mu = " << num(cfg.mu) << "\n";
  os << "alpha = " << num(cfg.alpha) << "\n";
  os << "delta = " << num(cfg.delta) << "\n";
  os << "bound_k_min = " << num(cfg.bound_k_min) << "\n";
  os << "bound_k_max = " << num(cfg.bound_k_max) << "\n";
  os << "bound_points = " << cfg.bound_points << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  return os.str();
}

}  // namespace calderon
