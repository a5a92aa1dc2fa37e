#include "lvfront/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lvfront/error.hpp"
#include "lvfront/serialize.hpp"

#ifndef LVFRONT_PRESET_DIR
#define LVFRONT_PRESET_DIR "presets"
#endif

namespace lvf {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"model", {"d", "r", "a", "b"}},
      {"grid", {"x_min", "x_max", "dx", "left", "right", "dt", "t_end"}},
      {"ic",
       {"scenario", "u_lo", "u_hi", "u_amplitude", "taper", "v_lo", "v_hi", "v_amplitude", "v_background",
        "v_pocket", "v_mirror", "x_u", "x_v"}},
      {"analysis",
       {"level", "speed", "speed_lo", "speed_hi", "shift", "shift_lo", "shift_hi", "shift_half_width",
        "shift_bracket", "bramson", "bramson_c", "bramson_lo", "bramson_hi", "bramson_t0", "kpp_match",
        "kpp_bracket", "extinction", "segregation", "segregation_factor", "terrace", "wave_L", "wave_n", "family",
        "p0", "q0", "rate", "shift0", "shift1", "epsilon", "certify_time", "lattice_t0", "lattice_t1",
        "lattice_dt", "lattice_half_width", "lattice_dx"}},
      {"output", {"dir", "run_id", "seed", "snapshot_dt", "final_state"}},
  };
  return k;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::optional<double> to_double(const std::string& s) {
  double x = 0.0;
  const auto t = trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return x;
}

std::optional<bool> to_bool(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  return std::nullopt;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_number(v[i]);
  }
  return s;
}

// Typed reader that records every problem instead of stopping.
class Reader {
 public:
  Reader(const KeyValues& kv, std::vector<ConfigIssue>& errors) : kv_(kv), errors_(errors) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  void number(const std::string& key, double& out) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    if (auto x = to_double(it->second); x && std::isfinite(*x)) {
      out = *x;
    } else {
      issue(key, "type", "expected a finite number, got '" + it->second + "'");
    }
  }

  void number(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    double x = 0.0;
    const std::size_t before = errors_.size();
    number(key, x);
    if (errors_.size() == before) out = x;
  }

  void flag(const std::string& key, bool& out) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    if (auto b = to_bool(it->second)) {
      out = *b;
    } else {
      issue(key, "type", "expected true or false, got '" + it->second + "'");
    }
  }

  void count(const std::string& key, std::size_t& out) {
    double x = static_cast<double>(out);
    const std::size_t before = errors_.size();
    number(key, x);
    if (errors_.size() != before) return;
    if (x < 0.0 || x != std::floor(x) || x > 1e9) {
      issue(key, "type", "expected a non-negative integer");
      return;
    }
    out = static_cast<std::size_t>(x);
  }

  void list(const std::string& key, std::vector<double>& out) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    std::vector<double> v;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto x = to_double(item);
      if (!x) {
        issue(key, "type", "expected a comma-separated list of numbers, got '" + it->second + "'");
        return;
      }
      v.push_back(*x);
    }
    out = v;
  }

  void text(const std::string& key, std::string& out) {
    if (auto it = kv_.find(key); it != kv_.end()) out = trim(it->second);
  }

  void issue(const std::string& key, const std::string& invariant, const std::string& message) {
    errors_.push_back({key, invariant, message});
  }

 private:
  const KeyValues& kv_;
  std::vector<ConfigIssue>& errors_;
};

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::A1: return "a1";
    case Scenario::A2: return "a2";
    case Scenario::SimpleIC: return "simple";
    case Scenario::Custom: return "custom";
  }
  return "a2";
}

std::optional<Scenario> parse_scenario(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "a1") return Scenario::A1;
  if (s == "a2") return Scenario::A2;
  if (s == "simple" || s == "simpleic") return Scenario::SimpleIC;
  return std::nullopt;
}

std::optional<Closure> parse_closure(const std::string& s) {
  if (s == "zero_flux") return Closure::ZeroFlux;
  if (s == "pinned") return Closure::Pinned;
  return std::nullopt;
}

std::string closure_name(Closure c) { return c == Closure::ZeroFlux ? "zero_flux" : "pinned"; }

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

void positive(Reader& rd, const std::string& key, double x) {
  if (!(x > 0.0)) rd.issue(key, "positivity", key + " must be > 0, got " + format_number(x));
}

void window(Reader& rd, const std::string& key, double lo, double hi, double t_end) {
  const bool lo_set = lo >= 0.0, hi_set = hi >= 0.0;
  if ((lo_set && lo > t_end) || (hi_set && hi > t_end) || (lo_set && hi_set && !(lo < hi))) {
    rd.issue(key, "window", "window [" + format_number(lo) + ", " + format_number(hi) +
                                "] must satisfy lo < hi <= t_end = " + format_number(t_end));
  }
}

KeyValues flatten_ini(std::string_view text, std::vector<ConfigIssue>& errors) {
  // '#' comments are accepted in addition to ';'.
  std::string cleaned;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] == '#') line = ";" + line;
    cleaned += line + "\n";
  }
  KeyValues kv;
  boost::property_tree::ptree pt;
  try {
    std::istringstream ss(cleaned);
    boost::property_tree::ini_parser::read_ini(ss, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    std::ostringstream os;
    os << e.message() << " (line " << e.line() << ")";
    errors.push_back({"", "syntax", os.str()});
    return kv;
  }
  for (const auto& [section, body] : pt) {
    if (body.empty()) {
      errors.push_back({section, "known keys", "key '" + section + "' appears outside any section"});
      continue;
    }
    for (const auto& [key, value] : body) kv[section + "." + key] = value.get_value<std::string>();
  }
  return kv;
}

KeyValues flatten_json(std::string_view text, std::vector<ConfigIssue>& errors) {
  KeyValues kv;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    errors.push_back({"", "syntax", e.what()});
    return kv;
  }
  if (!j.is_object()) {
    errors.push_back({"", "syntax", "top level must be an object of sections"});
    return kv;
  }
  const auto scalar = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return bool_text(v.get<bool>());
    if (v.is_number()) return v.dump();
    return std::nullopt;
  };
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) {
      errors.push_back({section, "known keys", "'" + section + "' must be a section object"});
      continue;
    }
    for (const auto& [key, value] : body.items()) {
      const std::string full = section + "." + key;
      if (auto s = scalar(value)) {
        kv[full] = *s;
      } else if (value.is_array()) {
        std::string joined;
        bool ok = true;
        for (std::size_t i = 0; i < value.size(); ++i) {
          auto s2 = scalar(value[i]);
          if (!s2) ok = false;
          if (i) joined += ",";
          joined += s2.value_or("");
        }
        if (ok) {
          kv[full] = joined;
        } else {
          errors.push_back({full, "type", "arrays may hold only scalars"});
        }
      } else {
        errors.push_back({full, "type", "unsupported value type"});
      }
    }
  }
  return kv;
}

}  // namespace

std::string ConfigResult::summary() const {
  std::string s;
  for (const auto& e : errors) {
    s += (e.key.empty() ? std::string("config") : e.key) + ": " + e.message + " [" + e.invariant + "]\n";
  }
  return s;
}

ConfigResult config_from_keys(const KeyValues& kv) {
  ConfigResult res;
  auto& errors = res.errors;
  for (const auto& [full, value] : kv) {
    const auto dot = full.find('.');
    const std::string section = full.substr(0, dot);
    const auto sec = known_keys().find(section);
    if (dot == std::string::npos || sec == known_keys().end()) {
      errors.push_back({full, "known keys", "unknown section '" + section + "'"});
    } else if (!sec->second.count(full.substr(dot + 1))) {
      errors.push_back({full, "known keys", "unknown key '" + full.substr(dot + 1) + "' in [" + section + "]"});
    }
  }

  Reader rd(kv, errors);
  ExperimentConfig cfg;

  // [model]
  rd.number("model.d", cfg.model.d);
  rd.number("model.r", cfg.model.r);
  rd.number("model.a", cfg.model.a);
  rd.number("model.b", cfg.model.b);
  positive(rd, "model.d", cfg.model.d);
  positive(rd, "model.r", cfg.model.r);
  positive(rd, "model.a", cfg.model.a);
  positive(rd, "model.b", cfg.model.b);

  // [grid]
  double x_min = cfg.grid.x_min, x_max = cfg.grid.x_max, dx = cfg.grid.dx();
  rd.number("grid.x_min", x_min);
  rd.number("grid.x_max", x_max);
  rd.number("grid.dx", dx);
  std::string left = closure_name(cfg.grid.left), right = closure_name(cfg.grid.right);
  rd.text("grid.left", left);
  rd.text("grid.right", right);
  const auto cl = parse_closure(left), cr = parse_closure(right);
  if (!cl) rd.issue("grid.left", "closure", "expected zero_flux or pinned, got '" + left + "'");
  if (!cr) rd.issue("grid.right", "closure", "expected zero_flux or pinned, got '" + right + "'");
  bool grid_ok = true;
  positive(rd, "grid.dx", dx);
  if (!(x_max > x_min)) {
    rd.issue("grid.x_max", "ordering", "x_max must exceed x_min");
    grid_ok = false;
  }
  if (!(dx > 0.0)) grid_ok = false;
  if (grid_ok) {
    const double cells = (x_max - x_min) / dx;
    if (std::abs(cells - std::round(cells)) > 1e-6 * std::max(1.0, cells)) {
      rd.issue("grid.dx", "grid spacing", "dx must divide x_max - x_min");
      grid_ok = false;
    } else if (std::round(cells) + 1.0 < 16.0) {
      rd.issue("grid.dx", "grid size", "the grid needs at least 16 nodes");
      grid_ok = false;
    } else {
      cfg.grid = Grid::with_spacing(x_min, x_max, dx, cl.value_or(Closure::ZeroFlux), cr.value_or(Closure::ZeroFlux));
    }
  }
  if (kv.count("grid.dt") && trim(kv.at("grid.dt")) == "matched") {
    cfg.dt_matched = true;
  } else {
    rd.number("grid.dt", cfg.dt);
    positive(rd, "grid.dt", cfg.dt);
  }
  rd.number("grid.t_end", cfg.t_end);
  positive(rd, "grid.t_end", cfg.t_end);

  // [ic]
  auto& ic = cfg.ic;
  std::string scen = scenario_name(ic.scenario);
  rd.text("ic.scenario", scen);
  if (auto s = parse_scenario(scen)) {
    ic.scenario = *s;
  } else {
    rd.issue("ic.scenario", "scenario", "expected a1, a2 or simple, got '" + scen + "'");
  }
  rd.number("ic.u_lo", ic.u_lo);
  rd.number("ic.u_hi", ic.u_hi);
  rd.number("ic.u_amplitude", ic.u_amplitude);
  rd.number("ic.taper", ic.taper);
  rd.number("ic.v_lo", ic.v_lo);
  rd.number("ic.v_hi", ic.v_hi);
  rd.number("ic.v_amplitude", ic.v_amplitude);
  rd.number("ic.v_background", ic.v_background);
  rd.number("ic.v_pocket", ic.v_pocket);
  rd.flag("ic.v_mirror", ic.v_mirror);
  rd.number("ic.x_u", ic.x_u);
  rd.number("ic.x_v", ic.x_v);
  bool ic_ok = true;
  const auto nonneg = [&](const std::string& key, double x) {
    if (x < 0.0) {
      rd.issue(key, "nonnegativity", key + " must be >= 0");
      ic_ok = false;
    }
  };
  nonneg("ic.u_amplitude", ic.u_amplitude);
  nonneg("ic.taper", ic.taper);
  nonneg("ic.v_amplitude", ic.v_amplitude);
  nonneg("ic.v_pocket", ic.v_pocket);
  if (ic.scenario == Scenario::A1 || ic.scenario == Scenario::A2) {
    if (!(ic.u_lo < ic.u_hi)) {
      rd.issue("ic.u_hi", "ordering", "u_lo must be below u_hi");
      ic_ok = false;
    }
    if (!(ic.v_lo < ic.v_hi)) {
      rd.issue("ic.v_hi", "ordering", "v_lo must be below v_hi");
      ic_ok = false;
    }
  }
  if (ic.scenario == Scenario::A1 && !(ic.v_background > 0.0)) {
    rd.issue("ic.v_background", "positive lower bound", "scenario a1 needs v_background > 0");
    ic_ok = false;
  }
  if (ic.scenario == Scenario::A1 && !(ic.v_pocket > 0.0)) {
    rd.issue("ic.v_pocket", "positive lower bound", "scenario a1 needs v_pocket > 0");
    ic_ok = false;
  }
  if (grid_ok && ic_ok) {
    try {
      (void)make_initial(cfg.grid, ic);
    } catch (const Error& e) {
      rd.issue("ic", "margin rule", e.what());
      ic_ok = false;
    }
  }

  // Scheme step: matched or checked against the monotone bound.
  if (grid_ok && cfg.model.d > 0 && cfg.model.r > 0 && cfg.model.a > 0 && cfg.model.b > 0) {
    if (cfg.dt_matched) {
      try {
        cfg.dt = kpp_matched_dt(cfg.model.d, cfg.model.r, cfg.grid.dx());
      } catch (const Error& e) {
        rd.issue("grid.dt", "matched step", e.what());
      }
    }
    const double um = std::max(1.0, ic.u_amplitude);
    const double vm = std::max({1.0, ic.v_amplitude, ic.v_background, ic.v_pocket});
    const double bound = max_stable_dt(cfg.model, cfg.grid.dx(), um, vm);
    if (cfg.dt > bound) {
      rd.issue("grid.dt", "stability bound",
               "dt = " + format_number(cfg.dt) + " exceeds the monotone bound " + format_number(bound));
    }
  }

  // [analysis]
  auto& an = cfg.analysis;
  rd.number("analysis.level", an.level);
  if (!(an.level > 0.0 && an.level < 1.0)) rd.issue("analysis.level", "level range", "level must lie in (0, 1)");
  rd.flag("analysis.speed", an.speed);
  rd.number("analysis.speed_lo", an.speed_lo);
  rd.number("analysis.speed_hi", an.speed_hi);
  window(rd, "analysis.speed_lo", an.speed_lo, an.speed_hi, cfg.t_end);
  rd.flag("analysis.shift", an.shift);
  rd.number("analysis.shift_lo", an.shift_lo);
  rd.number("analysis.shift_hi", an.shift_hi);
  window(rd, "analysis.shift_lo", an.shift_lo, an.shift_hi, cfg.t_end);
  rd.number("analysis.shift_half_width", an.shift_half_width);
  rd.number("analysis.shift_bracket", an.shift_bracket);
  if (an.shift_half_width < 20.0) {
    rd.issue("analysis.shift_half_width", "window", "the comparison window must be at least 40 wide");
  }
  positive(rd, "analysis.shift_bracket", an.shift_bracket);
  rd.flag("analysis.bramson", an.bramson);
  rd.number("analysis.bramson_c", an.bramson_c);
  rd.number("analysis.bramson_lo", an.bramson_lo);
  rd.number("analysis.bramson_hi", an.bramson_hi);
  rd.list("analysis.bramson_t0", an.bramson_t0);
  if (an.bramson) {
    if (an.bramson_lo < 20.0) rd.issue("analysis.bramson_lo", "bramson window", "the fit window must start at t >= 20");
    window(rd, "analysis.bramson_lo", an.bramson_lo, an.bramson_hi, cfg.t_end);
    if (an.bramson_t0.empty()) rd.issue("analysis.bramson_t0", "bramson window", "t0 grid must not be empty");
    for (double t0 : an.bramson_t0) {
      if (an.bramson_lo + t0 <= 0.0) rd.issue("analysis.bramson_t0", "bramson window", "t + t0 must stay positive");
    }
  }
  if (an.bramson_c) positive(rd, "analysis.bramson_c", *an.bramson_c);
  rd.flag("analysis.kpp_match", an.kpp_match);
  rd.number("analysis.kpp_bracket", an.kpp_bracket);
  positive(rd, "analysis.kpp_bracket", an.kpp_bracket);
  rd.flag("analysis.extinction", an.extinction);
  rd.flag("analysis.segregation", an.segregation);
  rd.number("analysis.segregation_factor", an.segregation_factor);
  if (!(an.segregation_factor > 0.0 && an.segregation_factor < 1.0)) {
    rd.issue("analysis.segregation_factor", "cone inside c_uv", "segregation_factor must lie in (0, 1)");
  }
  rd.flag("analysis.terrace", an.terrace);
  rd.number("analysis.wave_L", an.wave_L);
  positive(rd, "analysis.wave_L", an.wave_L);
  rd.count("analysis.wave_n", an.wave_n);
  if (an.wave_n < 101 || an.wave_n % 2 == 0) rd.issue("analysis.wave_n", "wave grid", "wave_n must be odd and >= 101");

  if (kv.count("analysis.family")) {
    SuperSubParams sp;
    const std::string fam = trim(kv.at("analysis.family"));
    if (auto f = parse_family(fam)) {
      sp.family = *f;
    } else {
      rd.issue("analysis.family", "family", "unknown family '" + fam + "'");
    }
    rd.number("analysis.p0", sp.p0);
    rd.number("analysis.q0", sp.q0);
    rd.number("analysis.rate", sp.rate);
    rd.number("analysis.shift0", sp.shift0);
    rd.number("analysis.shift1", sp.shift1);
    rd.number("analysis.epsilon", sp.epsilon);
    positive(rd, "analysis.rate", sp.rate);
    if (sp.p0 < 0.0) rd.issue("analysis.p0", "nonnegativity", "p0 must be >= 0");
    if (sp.q0 < 0.0) rd.issue("analysis.q0", "nonnegativity", "q0 must be >= 0");
    an.pair = sp;
  } else {
    for (const char* k : {"p0", "q0", "rate", "shift0", "shift1", "epsilon", "certify_time"}) {
      if (kv.count(std::string("analysis.") + k)) {
        rd.issue(std::string("analysis.") + k, "family", "pair parameters need analysis.family");
      }
    }
  }
  rd.number("analysis.certify_time", an.certify_time);
  if (an.certify_time && *an.certify_time < 0.0) rd.issue("analysis.certify_time", "nonnegativity", "must be >= 0");
  rd.number("analysis.lattice_t0", an.lattice.t0);
  rd.number("analysis.lattice_t1", an.lattice.t1);
  rd.number("analysis.lattice_dt", an.lattice.dt);
  rd.number("analysis.lattice_half_width", an.lattice.half_width);
  rd.number("analysis.lattice_dx", an.lattice.dx);
  if (!(an.lattice.t1 > an.lattice.t0) || an.lattice.t0 < 0.0) {
    rd.issue("analysis.lattice_t1", "window", "lattice needs 0 <= t0 < t1");
  }
  positive(rd, "analysis.lattice_dt", an.lattice.dt);
  positive(rd, "analysis.lattice_dx", an.lattice.dx);
  positive(rd, "analysis.lattice_half_width", an.lattice.half_width);

  // [output]
  auto& out = cfg.output;
  rd.text("output.dir", out.dir);
  rd.text("output.run_id", out.run_id);
  if (!valid_identifier(out.run_id)) rd.issue("output.run_id", "identifier", "run_id may hold only [A-Za-z0-9_-]");
  if (out.dir.empty()) rd.issue("output.dir", "identifier", "dir must not be empty");
  double seed = static_cast<double>(out.seed);
  rd.number("output.seed", seed);
  if (seed < 0.0 || seed != std::floor(seed) || seed > 9.007199254740992e15) {
    rd.issue("output.seed", "type", "seed must be a non-negative integer");
  } else {
    out.seed = static_cast<std::uint64_t>(seed);
  }
  rd.number("output.snapshot_dt", out.snapshot_dt);
  positive(rd, "output.snapshot_dt", out.snapshot_dt);
  const bool fronts = an.speed || an.shift || an.bramson || an.terrace;
  if (fronts && out.snapshot_dt > 1.0) {
    rd.issue("output.snapshot_dt", "output density", "front analyses need snapshot_dt <= 1");
  }
  rd.flag("output.final_state", out.final_state);

  if (errors.empty()) res.config = cfg;
  return res;
}

ConfigResult parse_config(std::string_view text) {
  std::vector<ConfigIssue> errors;
  const std::string t = trim(text);
  const KeyValues kv = (!t.empty() && t[0] == '{') ? flatten_json(t, errors) : flatten_ini(text, errors);
  if (!errors.empty()) {
    ConfigResult r = config_from_keys(kv);
    r.config.reset();
    errors.insert(errors.end(), r.errors.begin(), r.errors.end());
    r.errors = errors;
    return r;
  }
  return config_from_keys(kv);
}

ConfigResult load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    ConfigResult r;
    r.errors.push_back({"", "file", e.what()});
    return r;
  }
  return parse_config(text);
}

KeyValues config_to_keys(const ExperimentConfig& c) {
  KeyValues kv;
  const auto n = [](double x) { return format_number(x); };
  kv["model.d"] = n(c.model.d);
  kv["model.r"] = n(c.model.r);
  kv["model.a"] = n(c.model.a);
  kv["model.b"] = n(c.model.b);
  kv["grid.x_min"] = n(c.grid.x_min);
  kv["grid.x_max"] = n(c.grid.x_max);
  kv["grid.dx"] = n(c.grid.dx());
  kv["grid.left"] = closure_name(c.grid.left);
  kv["grid.right"] = closure_name(c.grid.right);
  kv["grid.dt"] = c.dt_matched ? "matched" : n(c.dt);
  kv["grid.t_end"] = n(c.t_end);
  const auto& ic = c.ic;
  kv["ic.scenario"] = scenario_name(ic.scenario);
  kv["ic.u_lo"] = n(ic.u_lo);
  kv["ic.u_hi"] = n(ic.u_hi);
  kv["ic.u_amplitude"] = n(ic.u_amplitude);
  kv["ic.taper"] = n(ic.taper);
  kv["ic.v_lo"] = n(ic.v_lo);
  kv["ic.v_hi"] = n(ic.v_hi);
  kv["ic.v_amplitude"] = n(ic.v_amplitude);
  kv["ic.v_background"] = n(ic.v_background);
  kv["ic.v_pocket"] = n(ic.v_pocket);
  kv["ic.v_mirror"] = bool_text(ic.v_mirror);
  kv["ic.x_u"] = n(ic.x_u);
  kv["ic.x_v"] = n(ic.x_v);
  const auto& an = c.analysis;
  kv["analysis.level"] = n(an.level);
  kv["analysis.speed"] = bool_text(an.speed);
  kv["analysis.speed_lo"] = n(an.speed_lo);
  kv["analysis.speed_hi"] = n(an.speed_hi);
  kv["analysis.shift"] = bool_text(an.shift);
  kv["analysis.shift_lo"] = n(an.shift_lo);
  kv["analysis.shift_hi"] = n(an.shift_hi);
  kv["analysis.shift_half_width"] = n(an.shift_half_width);
  kv["analysis.shift_bracket"] = n(an.shift_bracket);
  kv["analysis.bramson"] = bool_text(an.bramson);
  if (an.bramson_c) kv["analysis.bramson_c"] = n(*an.bramson_c);
  kv["analysis.bramson_lo"] = n(an.bramson_lo);
  kv["analysis.bramson_hi"] = n(an.bramson_hi);
  kv["analysis.bramson_t0"] = list_text(an.bramson_t0);
  kv["analysis.kpp_match"] = bool_text(an.kpp_match);
  kv["analysis.kpp_bracket"] = n(an.kpp_bracket);
  kv["analysis.extinction"] = bool_text(an.extinction);
  kv["analysis.segregation"] = bool_text(an.segregation);
  kv["analysis.segregation_factor"] = n(an.segregation_factor);
  kv["analysis.terrace"] = bool_text(an.terrace);
  kv["analysis.wave_L"] = n(an.wave_L);
  kv["analysis.wave_n"] = std::to_string(an.wave_n);
  if (an.pair) {
    kv["analysis.family"] = to_string(an.pair->family);
    kv["analysis.p0"] = n(an.pair->p0);
    kv["analysis.q0"] = n(an.pair->q0);
    kv["analysis.rate"] = n(an.pair->rate);
    kv["analysis.shift0"] = n(an.pair->shift0);
    kv["analysis.shift1"] = n(an.pair->shift1);
    kv["analysis.epsilon"] = n(an.pair->epsilon);
  }
  if (an.certify_time) kv["analysis.certify_time"] = n(*an.certify_time);
  kv["analysis.lattice_t0"] = n(an.lattice.t0);
  kv["analysis.lattice_t1"] = n(an.lattice.t1);
  kv["analysis.lattice_dt"] = n(an.lattice.dt);
  kv["analysis.lattice_half_width"] = n(an.lattice.half_width);
  kv["analysis.lattice_dx"] = n(an.lattice.dx);
  kv["output.dir"] = c.output.dir;
  kv["output.run_id"] = c.output.run_id;
  kv["output.seed"] = std::to_string(c.output.seed);
  kv["output.snapshot_dt"] = n(c.output.snapshot_dt);
  kv["output.final_state"] = bool_text(c.output.final_state);
  return kv;
}

std::string config_to_ini(const ExperimentConfig& cfg) {
  const KeyValues kv = config_to_keys(cfg);
  std::string out;
  for (const char* section : {"model", "grid", "ic", "analysis", "output"}) {
    if (!out.empty()) out += "\n";
    out += "[" + std::string(section) + "]\n";
    const std::string prefix = std::string(section) + ".";
    for (const auto& [k, v] : kv) {
      if (k.rfind(prefix, 0) == 0) out += k.substr(prefix.size()) + " = " + v + "\n";
    }
  }
  return out;
}

ConfigResult with_override(const ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  KeyValues kv = config_to_keys(cfg);
  kv[key] = value;
  return config_from_keys(kv);
}

std::vector<std::string> preset_names() { return {"theorem1", "theorem2", "theorem3", "appendix"}; }

std::filesystem::path preset_path(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    fail(ErrorKind::Config, "unknown preset '" + name + "'");
  }
  std::filesystem::path dir = LVFRONT_PRESET_DIR;
  if (const char* env = std::getenv("LVFRONT_PRESETS")) dir = env;
  return dir / (name + ".ini");
}

}  // namespace lvf
