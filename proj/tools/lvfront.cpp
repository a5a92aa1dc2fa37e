// lvfront: command-line front end for simulations, fronts and comparison pairs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lvfront/config.hpp"
#include "lvfront/error.hpp"
#include "lvfront/experiment.hpp"
#include "lvfront/serialize.hpp"
#include "lvfront/supersub.hpp"
#include "lvfront/wave.hpp"

namespace fs = std::filesystem;
using namespace lvf;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kCheck = 3 };

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct ConfigError {
  std::string text;
};

ExperimentConfig load(const Common& c) {
  if (!c.config.empty() && !c.preset.empty()) throw ConfigError{"--config and --preset are mutually exclusive\n"};
  ConfigResult r;
  if (!c.preset.empty()) {
    try {
      r = load_config(preset_path(c.preset));
    } catch (const Error& e) {
      throw ConfigError{std::string(e.what()) + "\n"};
    }
  } else if (!c.config.empty()) {
    r = load_config(c.config);
  } else {
    r = parse_config("");
  }
  if (!r.ok()) throw ConfigError{r.summary()};
  ExperimentConfig cfg = *r.config;
  if (c.seed) cfg.output.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) { return c.out.empty() ? fs::path(cfg.output.dir) : fs::path(c.out); }

int report_manifest(const RunManifest& m, const fs::path& dir) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : m.errors) std::cerr << "error: " << e << "\n";
  std::cout << "wrote " << m.files.size() + 1 << " files to " << dir.string() << "\n";
  return m.exit_code == 0 ? kOk : kNumerical;
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = out_dir(c, cfg);
  return report_manifest(run_experiment(cfg, dir), dir);
}

int cmd_wave(const Common& c, std::optional<double> eps, std::optional<double> kpp_speed) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = out_dir(c, cfg);
  WaveSolveOptions wo;
  wo.L = cfg.analysis.wave_L;
  wo.n = cfg.analysis.wave_n;
  WaveProfile w;
  Json j;
  if (kpp_speed) {
    w = solve_kpp_profile(cfg.model.d, cfg.model.r, *kpp_speed, wo);
    j["wave"] = wave_summary(w);
  } else {
    w = eps ? solve_perturbed_wave(cfg.model, *eps, wo) : solve_bistable_wave(cfg.model, wo);
    const CharacteristicRoots roots = eps ? perturbed_roots(cfg.model, *eps, w.speed) : char_roots(cfg.model, w.speed);
    j["wave"] = wave_summary(w);
    j["roots"] = to_json(roots);
    Json tails = Json::array();
    for (auto q : {TailQuantity::U_Plus, TailQuantity::VDeficit_Plus, TailQuantity::V_Minus, TailQuantity::UDeficit_Minus}) {
      tails.push_back(to_json(fit_tail_decay(w, roots, q)));
    }
    j["tails"] = tails;
    j["equation_residual"] = wave_equation_residual(w);
  }
  write_text(dir / "wave.csv", wave_csv(w).str());
  write_text(dir / "wave.json", dump(j));
  std::printf("speed %.10g\n", w.speed);
  return kOk;
}

int cmd_roots(const Common& c, std::optional<double> speed) {
  const ExperimentConfig cfg = load(c);
  double s = 0.0;
  Json j;
  if (speed) {
    s = *speed;
  } else {
    WaveSolveOptions wo;
    wo.L = cfg.analysis.wave_L;
    wo.n = cfg.analysis.wave_n;
    s = solve_bistable_wave(cfg.model, wo).speed;
  }
  j["params"] = to_json(cfg.model);
  j["speeds"] = to_json(canonical_speeds(cfg.model).resolved(s));
  j["roots"] = to_json(char_roots(cfg.model, s));
  j["sign_prediction"] = to_json(cuv_sign_prediction(cfg.model));
  const std::string text = dump(j);
  if (!c.out.empty()) write_text(fs::path(c.out) / "roots.json", text);
  std::cout << text;
  return kOk;
}

int cmd_supersub(const Common& c, const std::string& family, double inflate, const std::string& method,
                 const std::string& expect) {
  ExperimentConfig cfg = load(c);
  SuperSubParams sp = cfg.analysis.pair.value_or(SuperSubParams{});
  if (!family.empty()) {
    auto f = parse_family(family);
    if (!f) throw ConfigError{"unknown family '" + family + "'\n"};
    sp.family = *f;
  } else if (!cfg.analysis.pair) {
    throw ConfigError{"supersub-verify needs analysis.family in the config or --family\n"};
  }
  sp.p0 *= inflate;
  const WaveProfile w = sp.family == Family::AppendixLower ? solve_perturbed_wave(cfg.model, sp.epsilon)
                                                           : solve_bistable_wave(cfg.model);
  const ConstraintVerdict cv = check_constraints(sp.family, cfg.model, sp, &w);
  const SuperSubPair pair(cfg.model, w, sp);
  const ResidualReport rep = evaluate_residuals(
      pair, cfg.analysis.lattice, method == "fd" ? ResidualMethod::FiniteDifference : ResidualMethod::Analytic,
      c.threads);
  const Json j{{"params", to_json(sp)}, {"constraints", to_json(cv)}, {"report", to_json(rep)}};
  const fs::path dir = out_dir(c, cfg);
  write_text(dir / "supersub.json", dump(j));
  std::printf("%s: constraints %s, violations n1=%zu n2=%zu, T_star %s\n", to_string(sp.family).c_str(),
              cv.pass ? "pass" : "fail", rep.n1_violations, rep.n2_violations,
              rep.T_star ? format_number(*rep.T_star).c_str() : "none");
  const bool has_violations = rep.n1_violations + rep.n2_violations > 0;
  if (expect == "violations") return has_violations ? kOk : kCheck;
  return rep.clean() ? kOk : kCheck;
}

int cmd_bramson(const Common& c, std::optional<double> lo, std::optional<double> hi) {
  ExperimentConfig cfg = load(c);
  cfg.analysis.bramson = true;
  const fs::path dir = out_dir(c, cfg);
  const RunManifest m = run_experiment(cfg, dir);
  const int code = report_manifest(m, dir);
  if (code != kOk) return code;
  const double kappa = m.results["bramson"]["kappa"].get<double>();
  std::printf("kappa %.6g (target %.6g)\n", kappa, m.results["bramson"]["target"].get<double>());
  if ((lo && kappa < *lo) || (hi && kappa > *hi)) return kCheck;
  return kOk;
}

int cmd_terrace(const Common& c) {
  ExperimentConfig cfg = load(c);
  cfg.analysis.terrace = true;
  const fs::path dir = out_dir(c, cfg);
  const RunManifest m = run_experiment(cfg, dir);
  const int code = report_manifest(m, dir);
  if (code != kOk) return code;
  const auto& t = m.results["terrace"];
  std::printf("terrace %s: u-speed %.6g, v-speed %.6g, sup u beyond c0 t %.3g\n", t["terrace"].get<bool>() ? "yes" : "no",
              t["u_speed"].get<double>(), t["v_speed"].get<double>(), t["sup_u_beyond"].get<double>());
  return t["terrace"].get<bool>() ? kOk : kCheck;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& vary, bool simulate) {
  const ExperimentConfig cfg = load(c);
  std::vector<SweepAxis> axes;
  try {
    for (const auto& v : vary) axes.push_back(parse_axis(v));
  } catch (const Error& e) {
    throw ConfigError{std::string(e.what()) + "\n"};
  }
  const fs::path dir = out_dir(c, cfg);
  const auto rows = sweep(cfg, axes, dir, {simulate, c.threads});
  write_text(dir / "sweep.csv", sweep_csv(axes, rows).str());
  std::size_t failed = 0, mismatched = 0;
  for (const auto& r : rows) {
    if (!r.ok) ++failed;
    if (r.verdict == "mismatch") ++mismatched;
  }
  std::printf("%zu rows, %zu failed, %zu sign mismatches\n", rows.size(), failed, mismatched);
  return mismatched ? kCheck : kOk;
}

int cmd_certify(const Common& c) {
  const ExperimentConfig cfg = load(c);
  if (!cfg.analysis.pair || cfg.analysis.pair->family != Family::LowerTwoSided) {
    throw ConfigError{"certify-invasion needs analysis.family = lower_two_sided\n"};
  }
  const SuperSubParams& sp = *cfg.analysis.pair;
  const WaveProfile w = solve_bistable_wave(cfg.model);
  const ConstraintVerdict cv = check_constraints(sp.family, cfg.model, sp);
  const SuperSubPair pair(cfg.model, w, sp);
  const ResidualReport rep = evaluate_residuals(pair, cfg.analysis.lattice, ResidualMethod::Analytic, c.threads);
  const double T = cfg.analysis.certify_time.value_or(rep.T_star.value_or(cfg.analysis.lattice.t1));
  const CertificateResult cert = invasion_certificate(cfg.grid, make_initial(cfg.grid, cfg.ic), pair, rep, T);
  Json j{{"params", to_json(sp)}, {"constraints", to_json(cv)}, {"report", to_json(rep)}, {"certificate", to_json(cert)}};
  j["certificate"]["T"] = T;
  const fs::path dir = out_dir(c, cfg);
  write_text(dir / "certificate.json", dump(j));
  std::printf("certified %s at T = %g (margin %.3g at x = %.4g, %c)\n", cert.certified ? "yes" : "no", T, cert.margin,
              cert.worst_x, cert.species);
  return cert.certified ? kOk : kCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lvfront: fronts of the two-species competition-diffusion system"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--config", c.config, "configuration file (INI or JSON)");
  app.add_option("--preset", c.preset, "shipped preset: theorem1, theorem2, theorem3, appendix");
  app.add_option("--out", c.out, "output directory (overrides output.dir)");
  app.add_option("--seed", c.seed, "seed echoed in the manifest");
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);

  int code = kOk;
  std::function<int()> run;

  auto* sim = app.add_subcommand("simulate", "run a configured experiment");
  sim->callback([&] { run = [&] { return cmd_simulate(c); }; });

  std::optional<double> eps, kpp;
  auto* wave = app.add_subcommand("wave", "solve the traveling front");
  wave->add_option("--epsilon", eps, "front of the shifted system");
  wave->add_option("--kpp", kpp, "single-species profile at this speed");
  wave->callback([&] { run = [&] { return cmd_wave(c, eps, kpp); }; });

  std::optional<double> speed;
  auto* roots = app.add_subcommand("roots", "characteristic roots at a speed (default c_uv)");
  roots->add_option("--speed", speed);
  roots->callback([&] { run = [&] { return cmd_roots(c, speed); }; });

  std::string family, method = "analytic", expect = "clean";
  double inflate = 1.0;
  auto* ss = app.add_subcommand("supersub-verify", "sign check of a comparison pair on the lattice");
  ss->add_option("--family", family);
  ss->add_option("--inflate", inflate, "multiply p0")->check(CLI::PositiveNumber);
  ss->add_option("--method", method)->check(CLI::IsMember({"analytic", "fd"}));
  ss->add_option("--expect", expect)->check(CLI::IsMember({"clean", "violations"}));
  ss->callback([&] { run = [&] { return cmd_supersub(c, family, inflate, method, expect); }; });

  std::optional<double> k_lo, k_hi;
  auto* br = app.add_subcommand("bramson", "fit the logarithmic delay of the u-front");
  br->add_option("--kappa-min", k_lo);
  br->add_option("--kappa-max", k_hi);
  br->callback([&] { run = [&] { return cmd_bramson(c, k_lo, k_hi); }; });

  auto* te = app.add_subcommand("terrace", "detect a propagating terrace");
  te->callback([&] { run = [&] { return cmd_terrace(c); }; });

  std::vector<std::string> vary;
  bool simulate = false;
  auto* sw = app.add_subcommand("sweep", "parameter sweep, one CSV row per point");
  sw->add_option("--vary", vary, "key=v1,v2,... or key=lo:hi:step (repeatable)")->required();
  sw->add_flag("--simulate", simulate, "run the full experiment per row");
  sw->callback([&] { run = [&] { return cmd_sweep(c, vary, simulate); }; });

  auto* ce = app.add_subcommand("certify-invasion", "check initial data against a two-sided lower pair");
  ce->callback([&] { run = [&] { return cmd_certify(c); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? kOk : kConfig;
  }
  try {
    code = run();
  } catch (const ConfigError& e) {
    std::cerr << e.text;
    code = kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = e.kind() == ErrorKind::Config ? kConfig : kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kNumerical;
  }
  return code;
}
