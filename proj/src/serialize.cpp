#include "lvfront/serialize.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "lvfront/error.hpp"

namespace lvf {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) fail(ErrorKind::InvalidParameter, "csv: header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    std::ostringstream os;
    os << "csv: row has " << cells.size() << " cells, header has " << header_.size();
    fail(ErrorKind::InvalidParameter, os.str());
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n") == std::string::npos) {
        out += c;
        continue;
      }
      out += '"';
      for (char ch : c) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string cell(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    fail(ErrorKind::Io, "sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

CsvTable state_csv(const Grid& grid, const FieldState& state) {
  CsvTable t({"x", "u", "v"});
  for (std::size_t i = 0; i < grid.n; ++i) t.add_row(std::vector<double>{grid.x(i), state.u[i], state.v[i]});
  return t;
}

CsvTable wave_csv(const WaveProfile& w) {
  CsvTable t({"xi", "U", "V", "dU", "dV"});
  for (std::size_t i = 0; i < w.size(); ++i) t.add_row(std::vector<double>{w.xi[i], w.U[i], w.V[i], w.dU[i], w.dV[i]});
  return t;
}

CsvTable front_trace_csv(const FrontTrace& tr) {
  CsvTable t({"t", "min", "max"});
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    t.add_row({format_number(tr.times[i]), cell(tr.positions_min[i]), cell(tr.positions_max[i])});
  }
  return t;
}

CsvTable bramson_csv(const BramsonFit& b) { return series_csv("omega", b.times, b.omega); }

CsvTable series_csv(const std::string& name, const std::vector<double>& t, const std::vector<double>& y) {
  CsvTable out({"t", name});
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) out.add_row(std::vector<double>{t[i], y[i]});
  return out;
}

namespace {

Json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json opt(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

std::string closure_name(Closure c) { return c == Closure::ZeroFlux ? "zero_flux" : "pinned"; }

}  // namespace

Json to_json(const ModelParams& p) { return Json{{"d", p.d}, {"r", p.r}, {"a", p.a}, {"b", p.b}}; }

Json to_json(const Grid& g) {
  return Json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"n", g.n}, {"dx", g.dx()},
              {"left", closure_name(g.left)}, {"right", closure_name(g.right)}};
}

Json to_json(const SpeedSet& s) {
  return Json{{"c_u", s.c_u}, {"c_v", s.c_v}, {"c_uv", opt(s.c_uv)}, {"c_0", opt(s.c_0)}};
}

Json to_json(const CharacteristicRoots& r) {
  return Json{{"speed", r.speed},         {"lambda1", r.lambda1},         {"lambda2", r.lambda2},
              {"lambda3", r.lambda3},     {"lambda4", r.lambda4},         {"Lambda_plus", r.Lambda_plus},
              {"Lambda_minus", r.Lambda_minus}, {"gamma_plus", r.gamma_plus}, {"gamma_minus", r.gamma_minus}};
}

Json to_json(const SignPrediction& s) { return Json{{"verdict", to_string(s.verdict)}, {"rule", to_string(s.rule)}}; }

Json to_json(const DecayFit& f) {
  Json j{{"quantity", to_string(f.quantity)}, {"valid", f.valid}};
  if (!f.valid) {
    j["reason"] = f.reason;
    return j;
  }
  j["measured_rate"] = num(f.measured_rate);
  j["predicted_rate"] = num(f.predicted_rate);
  j["relative_deviation"] = num(f.relative_deviation());
  j["gamma"] = f.gamma;
  j["window"] = Json::array({f.window_lo, f.window_hi});
  j["samples"] = f.samples;
  return j;
}

Json wave_summary(const WaveProfile& w) {
  Json j{{"kind", to_string(w.kind)},
         {"params", to_json(w.params)},
         {"speed", w.speed},
         {"L", w.L},
         {"h", w.h},
         {"nodes", w.size()},
         {"phase_anchor", w.phase_anchor},
         {"residual", w.residual},
         {"monotonicity_margin", w.monotonicity_margin},
         {"newton_iterations", w.newton_iterations},
         {"continuation_steps", w.continuation_steps}};
  if (w.kind == WaveKind::PerturbedBistable) j["epsilon"] = w.epsilon;
  j["notes"] = w.notes;
  return j;
}

Json to_json(const SuperSubParams& s) {
  Json j{{"family", to_string(s.family)}, {"p0", s.p0},         {"q0", s.q0},
         {"rate", s.rate},                {"shift0", s.shift0}, {"shift1", s.shift1}};
  if (s.family == Family::AppendixLower) j["epsilon"] = s.epsilon;
  return j;
}

Json to_json(const ConstraintVerdict& v) { return Json{{"pass", v.pass}, {"failed", v.failed}}; }

Json to_json(const ResidualReport& r) {
  const auto viol = [](const std::optional<Violation>& v) -> Json {
    if (!v) return nullptr;
    return Json{{"value", v->value}, {"t", v->t}, {"x", v->x}};
  };
  return Json{{"family", to_string(r.family)},
              {"method", r.method == ResidualMethod::Analytic ? "analytic" : "finite_difference"},
              {"lattice",
               {{"t0", r.lattice.t0},
                {"t1", r.lattice.t1},
                {"dt", r.lattice.dt},
                {"half_width", r.lattice.half_width},
                {"dx", r.lattice.dx}}},
              {"points", r.points},
              {"kink_points", r.kink_points},
              {"n1_violations", r.n1_violations},
              {"n2_violations", r.n2_violations},
              {"n1_worst", viol(r.n1_worst)},
              {"n2_worst", viol(r.n2_worst)},
              {"T_star", opt(r.T_star)},
              {"last_violation_time", opt(r.last_violation_time)}};
}

Json to_json(const CertificateResult& c) {
  return Json{{"certified", c.certified}, {"margin", num(c.margin)}, {"worst_x", c.worst_x},
              {"species", std::string(1, c.species)}};
}

Json to_json(const SpeedEstimate& s) {
  return Json{{"speed", s.speed}, {"half_width", s.half_width}, {"intercept", s.intercept}, {"samples", s.samples}};
}

Json to_json(const BramsonFit& b) {
  return Json{{"c", b.c},     {"kappa", b.kappa},         {"offset", b.offset},        {"t0", b.t0},
              {"rms", b.rms}, {"sup_omega", b.sup_omega}, {"samples", b.times.size()}};
}

Json to_json(const ShiftEstimate& s) {
  return Json{{"h", s.h},
              {"distance", s.distance},
              {"unimodal", s.unimodal},
              {"local_minima", s.local_minima},
              {"window", Json::array({s.window_lo, s.window_hi})}};
}

Json to_json(const LogLinearFit& f) {
  return Json{{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"r2", num(f.r2)},
              {"samples", f.samples},  {"skipped", f.skipped}};
}

Json to_json(const TerraceReport& t) {
  Json j{{"terrace", t.terrace},
         {"u_speed", t.u_speed},
         {"u_half_width", t.u_half_width},
         {"v_speed", t.v_speed},
         {"v_half_width", t.v_half_width},
         {"c0", t.c0},
         {"sup_u_beyond", t.sup_u_beyond},
         {"sup_u_beyond_decreasing", t.sup_u_beyond_decreasing},
         {"behind", t.behind ? to_json(*t.behind) : Json(nullptr)},
         {"diagnostics", t.diagnostics}};
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace lvf
