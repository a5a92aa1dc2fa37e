#include "lvfront/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "lvfront/error.hpp"
#include "lvfront/kernels.hpp"

namespace lvf {

namespace {

constexpr const char* kVersion = "1.0.0";

Json versions() {
  return Json{{"lvfront", kVersion},
              {"scheme", kSchemeVersion},
              {"isa", std::string(kernels::to_string(kernels::active().isa))},
              {"compiler", __VERSION__}};
}

Json config_json(const ExperimentConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : config_to_keys(cfg)) {
    const auto dot = k.find('.');
    j[k.substr(0, dot)][k.substr(dot + 1)] = v;
  }
  return j;
}

// Default windows: negative bounds mean "second half" or "last quartile".
double resolve(double x, double fallback) { return x >= 0.0 ? x : fallback; }

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    files_.push_back({name, content.size(), sha256_hex(content)});
  }

  std::vector<FileRecord> files() const {
    auto f = files_;
    std::sort(f.begin(), f.end(), [](const FileRecord& a, const FileRecord& b) { return a.path < b.path; });
    return f;
  }

 private:
  std::filesystem::path dir_;
  std::vector<FileRecord> files_;
};

std::string error_text(const std::exception& e) { return e.what(); }

}  // namespace

Json RunManifest::to_json() const {
  Json files_j = Json::array();
  for (const auto& f : files) files_j.push_back(Json{{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return Json{{"run_id", run_id},   {"exit_code", exit_code}, {"config", config},
              {"versions", versions}, {"results", results},     {"warnings", warnings},
              {"errors", errors},     {"wall_clock_s", wall_clock}, {"files", files_j}};
}

RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const auto t_start = std::chrono::steady_clock::now();
  RunManifest man;
  man.run_id = cfg.output.run_id;
  man.config = config_json(cfg);
  man.versions = versions();
  man.results = Json::object();
  Outputs out(out_dir);
  out.write("config.ini", config_to_ini(cfg));

  const auto numerical = [&](const std::string& where, const std::exception& e) {
    man.errors.push_back(where + ": " + error_text(e));
    man.exit_code = 2;
  };

  const auto& an = cfg.analysis;
  const ModelParams& m = cfg.model;
  SpeedSet speeds = canonical_speeds(m);

  // Bistable front, needed by the shift, segregation and terrace analyses.
  std::optional<WaveProfile> wave;
  const bool need_wave = an.shift || an.segregation || an.terrace;
  if (m.strong_competition()) {
    WaveSolveOptions wo;
    wo.L = an.wave_L;
    wo.n = an.wave_n;
    try {
      wave = solve_bistable_wave(m, wo);
      speeds = speeds.resolved(wave->speed);
      man.results["wave"] = wave_summary(*wave);
      out.write("wave.csv", wave_csv(*wave).str());
    } catch (const std::exception& e) {
      numerical("wave", e);
    }
  } else if (need_wave) {
    man.errors.push_back("wave: shift, segregation and terrace analyses need a > 1 and b > 1");
    man.exit_code = 2;
  }
  man.results["speeds"] = to_json(speeds);
  man.results["sign_prediction"] =
      m.strong_competition() ? to_json(cuv_sign_prediction(m)) : Json(nullptr);
  man.results["dt"] = cfg.dt;

  // Simulation with streaming analyses.
  FrontTracker tu(cfg.grid, Species::U, an.level), tv(cfg.grid, Species::V, an.level);
  std::optional<WaveEvaluator> eval;
  if (wave) eval.emplace(*wave);
  const double shift_lo = resolve(an.shift_lo, 0.75 * cfg.t_end), shift_hi = resolve(an.shift_hi, cfg.t_end);
  std::vector<double> shift_t, shift_h, shift_d;
  std::vector<double> ext_t, ext_v;
  SegregationSeries seg;
  const bool do_seg = an.segregation && speeds.c_uv && *speeds.c_uv > 0.0;
  if (an.segregation && wave && !do_seg) man.warnings.push_back("segregation: c_uv <= 0, no invasion cone");
  if (do_seg) seg.c = an.segregation_factor * *speeds.c_uv;
  Trajectory traj;
  traj.params = m;
  traj.grid = cfg.grid;
  traj.dt = cfg.dt;
  FieldState last;
  bool simulated = false;
  try {
    SimulationSetup setup{m, cfg.grid, cfg.dt, cfg.t_end, output_schedule(0.0, cfg.t_end, cfg.output.snapshot_dt)};
    const FieldState init = make_initial(cfg.grid, cfg.ic);
    const auto warns = simulate_streaming(setup, init, [&](const FieldState& s) {
      tu.observe(s);
      tv.observe(s);
      if (an.shift && eval && s.t >= shift_lo - 1e-9 && s.t <= shift_hi + 1e-9) {
        const auto& pos = tu.trace().positions_max.back();
        if (pos) {
          ShiftOptions so;
          so.half_width = an.shift_half_width;
          so.bracket = an.shift_bracket;
          const ShiftEstimate e = estimate_shift(cfg.grid, s, *eval, *pos, so);
          shift_t.push_back(s.t);
          shift_h.push_back(e.h);
          shift_d.push_back(e.distance);
        }
      }
      if (an.extinction) {
        ext_t.push_back(s.t);
        ext_v.push_back(sup_over(cfg.grid, s, Species::V, 0.0, cfg.grid.x_max));
      }
      if (do_seg) {
        bool tr = false;
        seg.times.push_back(s.t);
        seg.values.push_back(segregation_value(cfg.grid, s, seg.c, &tr));
        seg.truncated = seg.truncated || tr;
      }
      if (an.terrace) traj.snapshots.push_back(s);
      last = s;
    });
    man.warnings.insert(man.warnings.end(), warns.begin(), warns.end());
    traj.warnings = warns;
    simulated = true;
  } catch (const std::exception& e) {
    numerical("simulate", e);
  }

  if (simulated) {
    const FrontTrace trace_u = tu.take(), trace_v = tv.take();
    out.write("front_u.csv", front_trace_csv(trace_u).str());
    out.write("front_v.csv", front_trace_csv(trace_v).str());
    if (cfg.output.final_state) out.write("final_state.csv", state_csv(cfg.grid, last).str());

    if (an.speed) {
      const double lo = resolve(an.speed_lo, 0.5 * cfg.t_end), hi = resolve(an.speed_hi, cfg.t_end);
      Json sj = Json::object();
      for (const auto* tr : {&trace_u, &trace_v}) {
        const std::string name = to_string(tr->species);
        try {
          sj[name] = to_json(estimate_speed(*tr, lo, hi, Extreme::Max));
        } catch (const Error& e) {
          sj[name] = nullptr;
          man.warnings.push_back(name + "-speed: " + e.what());
        }
      }
      sj["window"] = Json::array({lo, hi});
      man.results["front_speed"] = sj;
    }

    if (an.shift && eval) {
      CsvTable t({"t", "h", "distance"});
      for (std::size_t i = 0; i < shift_t.size(); ++i) t.add_row(std::vector<double>{shift_t[i], shift_h[i], shift_d[i]});
      out.write("shift.csv", t.str());
      Json sj{{"window", Json::array({shift_lo, shift_hi})}, {"samples", shift_t.size()}};
      if (!shift_t.empty()) {
        sj["h_final"] = shift_h.back();
        sj["distance_final"] = shift_d.back();
        sj["distance_max"] = *std::max_element(shift_d.begin(), shift_d.end());
        sj["h_gap"] = max_pairwise_gap(shift_h);
      }
      man.results["shift"] = sj;
    }

    if (an.bramson) {
      const double c = an.bramson_c.value_or(speeds.c_u);
      try {
        const BramsonFit b =
            fit_bramson(trace_u, c, an.bramson_lo, resolve(an.bramson_hi, cfg.t_end), an.bramson_t0, Extreme::Max);
        out.write("bramson.csv", bramson_csv(b).str());
        Json bj = to_json(b);
        bj["target"] = 3.0 * m.d / c;
        man.results["bramson"] = bj;
      } catch (const Error& e) {
        numerical("bramson", e);
      }
    }

    if (an.kpp_match) {
      try {
        WaveSolveOptions wo;
        wo.L = std::max(an.wave_L, 100.0);
        wo.n = std::max<std::size_t>(an.wave_n, 8001) | 1;
        const WaveProfile kpp = solve_kpp_profile(m.d, m.r, speeds.c_u, wo);
        const WaveEvaluator ev(kpp);
        const double t = last.t;
        const double center = speeds.c_u * t - (3.0 * m.d / speeds.c_u) * std::log(std::max(t, 1.0));
        ShiftOptions so;
        so.bracket = an.kpp_bracket;
        const ShiftEstimate e = estimate_shift(cfg.grid, last, ev, center, so);
        Json kj = to_json(e);
        kj["t"] = t;
        kj["bramson_center"] = center;
        man.results["kpp_match"] = kj;
      } catch (const std::exception& e) {
        numerical("kpp_match", e);
      }
    }

    if (an.extinction) {
      out.write("extinction.csv", series_csv("sup_v_right", ext_t, ext_v).str());
      std::vector<double> t2, y2;
      const double mid = 0.5 * cfg.t_end;
      for (std::size_t i = 0; i < ext_t.size(); ++i) {
        if (ext_t[i] >= mid) {
          t2.push_back(ext_t[i]);
          y2.push_back(ext_v[i]);
        }
      }
      Json ej = to_json(fit_log_linear(t2, y2));
      ej["final"] = ext_v.empty() ? Json(nullptr) : Json(ext_v.back());
      man.results["extinction"] = ej;
    }

    if (do_seg) {
      fit_last_half(seg);
      out.write("segregation.csv", series_csv("metric", seg.times, seg.values).str());
      Json gj = to_json(seg.fit);
      gj["c"] = seg.c;
      gj["truncated"] = seg.truncated;
      man.results["segregation"] = gj;
    }

    if (an.terrace) {
      if (!(speeds.c_u < speeds.c_v) || !speeds.c_uv) {
        man.errors.push_back("terrace: needs c_u < c_v and a resolved c_uv");
        man.exit_code = 2;
      } else {
        try {
          const TerraceReport rep = detect_terrace(traj, speeds, wave ? &*wave : nullptr, {an.level});
          out.write("terrace.json", dump(to_json(rep)));
          man.results["terrace"] = to_json(rep);
        } catch (const std::exception& e) {
          numerical("terrace", e);
        }
      }
    }
  }

  if (an.pair) {
    try {
      const SuperSubParams& sp = *an.pair;
      WaveProfile pw = sp.family == Family::AppendixLower ? solve_perturbed_wave(m, sp.epsilon)
                       : wave                          ? *wave
                                                       : solve_bistable_wave(m);
      const ConstraintVerdict cv = check_constraints(sp.family, m, sp, &pw);
      const SuperSubPair pair(m, pw, sp);
      const ResidualReport rep = evaluate_residuals(pair, an.lattice);
      Json pj{{"params", to_json(sp)}, {"constraints", to_json(cv)}, {"report", to_json(rep)}};
      if (sp.family == Family::LowerTwoSided) {
        const double T = an.certify_time.value_or(rep.T_star.value_or(an.lattice.t1));
        const CertificateResult c = invasion_certificate(cfg.grid, make_initial(cfg.grid, cfg.ic), pair, rep, T);
        pj["certificate"] = to_json(c);
        pj["certificate"]["T"] = T;
      }
      out.write("pair.json", dump(pj));
      man.results["pair"] = pj;
    } catch (const std::exception& e) {
      numerical("pair", e);
    }
  }

  out.write("results.json", dump(man.results));
  man.files = out.files();
  man.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_text(out_dir / "manifest.json", dump(man.to_json()));
  return man;
}

SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "sweep axis '" + spec + "': expected key=values");
  SweepAxis ax;
  ax.key = spec.substr(0, eq);
  const std::string vals = spec.substr(eq + 1);
  if (vals.empty()) return ax;
  if (vals.find(':') != std::string::npos) {
    double lo = 0, hi = 0, st = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(vals);
    in.imbue(std::locale::classic());
    if (!(in >> lo >> c1 >> hi >> c2 >> st) || c1 != ':' || c2 != ':' || !(st > 0.0)) {
      fail(ErrorKind::Config, "sweep axis '" + spec + "': expected lo:hi:step with step > 0");
    }
    const double n = std::floor((hi - lo) / st + 1e-9);
    if (n + 1 > static_cast<double>(kMaxSweepPoints)) fail(ErrorKind::Config, "sweep axis '" + spec + "': too many values");
    for (long i = 0; i <= static_cast<long>(n); ++i) ax.values.push_back(format_number(lo + st * static_cast<double>(i)));
    return ax;
  }
  std::stringstream ss(vals);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) ax.values.push_back(item);
  }
  return ax;
}

SignVerdict speed_sign(double c) noexcept {
  if (std::abs(c) < kZeroSpeedTol) return SignVerdict::Zero;
  return c > 0.0 ? SignVerdict::Positive : SignVerdict::Negative;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes,
                            const std::filesystem::path& out_dir, const SweepOptions& opt) {
  std::size_t total = axes.empty() ? 0 : 1;
  for (const auto& a : axes) {
    total *= a.values.size();
    if (total > kMaxSweepPoints) fail(ErrorKind::Config, "sweep: more than 10^4 lattice points");
  }
  std::vector<SweepRow> rows(total);
  for (std::size_t i = 0; i < total; ++i) {
    rows[i].index = i;
    rows[i].point.resize(axes.size());
    std::size_t rem = i;
    for (std::size_t k = axes.size(); k-- > 0;) {
      rows[i].point[k] = axes[k].values[rem % axes[k].values.size()];
      rem /= axes[k].values.size();
    }
  }

  const auto run_row = [&](SweepRow& row) {
    ExperimentConfig cfg = base;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const ConfigResult r = with_override(cfg, axes[k].key, row.point[k]);
      if (!r.ok()) {
        row.ok = false;
        row.error = r.summary();
        while (!row.error.empty() && row.error.back() == '\n') row.error.pop_back();
        return;
      }
      cfg = *r.config;
    }
    row.verdict = "n/a";
    try {
      if (cfg.model.strong_competition()) {
        WaveSolveOptions wo;
        wo.L = cfg.analysis.wave_L;
        wo.n = cfg.analysis.wave_n;
        const WaveProfile w = solve_bistable_wave(cfg.model, wo);
        row.c_uv = w.speed;
        const SignPrediction p = cuv_sign_prediction(cfg.model);
        row.prediction = to_string(p.verdict);
        if (p.verdict == SignVerdict::Unknown) {
          row.verdict = "unknown";
        } else {
          row.verdict = speed_sign(w.speed) == p.verdict ? "match" : "mismatch";
        }
      }
      if (opt.simulate) {
        char name[32];
        std::snprintf(name, sizeof name, "row_%04zu", row.index);
        cfg.output.run_id = name;
        const RunManifest man = run_experiment(cfg, out_dir / name);
        const auto& res = man.results;
        const auto get = [&](const char* a, const char* b, const char* c) -> std::optional<double> {
          if (!res.contains(a) || !res[a].is_object()) return std::nullopt;
          const Json* j = &res[a];
          if (b) {
            if (!j->contains(b) || !(*j)[b].is_object()) return std::nullopt;
            j = &(*j)[b];
          }
          if (!j->contains(c) || !(*j)[c].is_number()) return std::nullopt;
          return (*j)[c].get<double>();
        };
        row.u_speed = get("front_speed", "u", "speed");
        row.v_speed = get("front_speed", "v", "speed");
        row.kappa = get("bramson", nullptr, "kappa");
        if (man.exit_code != 0) {
          row.ok = false;
          row.error = man.errors.empty() ? "run failed" : man.errors.front();
        }
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) run_row(rows[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

CsvTable sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows) {
  std::vector<std::string> header{"index"};
  for (const auto& a : axes) header.push_back(a.key);
  for (const char* h : {"status", "c_uv", "prediction", "verdict", "u_speed", "v_speed", "kappa", "error"}) {
    header.push_back(h);
  }
  CsvTable t(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{std::to_string(r.index)};
    cells.insert(cells.end(), r.point.begin(), r.point.end());
    cells.push_back(r.ok ? "ok" : "error");
    cells.push_back(cell(r.c_uv));
    cells.push_back(r.prediction);
    cells.push_back(r.verdict);
    cells.push_back(cell(r.u_speed));
    cells.push_back(cell(r.v_speed));
    cells.push_back(cell(r.kappa));
    cells.push_back(r.error);
    t.add_row(std::move(cells));
  }
  return t;
}

}  // namespace lvf
