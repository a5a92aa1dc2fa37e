#include <doctest.h>

#include <algorithm>
#include <string>

#include "lvfront/config.hpp"

using namespace lvf;

namespace {

bool has_issue(const ConfigResult& r, const std::string& key, const std::string& invariant) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ConfigIssue& e) { return e.key == key && e.invariant == invariant; });
}

const char* kMinimal = "[model]\nd = 1\nr = 1\na = 2\nb = 3\n";

}  // namespace

TEST_CASE("minimal config fills the defaults") {
  const ConfigResult r = parse_config(kMinimal);
  REQUIRE_MESSAGE(r.ok(), r.summary());
  const ExperimentConfig& c = *r.config;
  CHECK(c.model.a == 2.0);
  CHECK(c.model.b == 3.0);
  CHECK(c.dt == 0.004);
  CHECK(c.t_end == 200.0);
  CHECK(c.grid.x_min == -50.0);
  CHECK(c.grid.n == 1001);
  CHECK(c.analysis.level == 0.5);
  CHECK(c.output.run_id == "run");
  CHECK(r.errors.empty());
}

TEST_CASE("invariant violations are named") {
  SUBCASE("negative diffusion") {
    const ConfigResult r = parse_config("[model]\nd = -1\nr = 1\na = 2\nb = 3\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "model.d", "positivity"));
    CHECK(r.summary().find("[positivity]") != std::string::npos);
  }
  SUBCASE("initial data wider than the grid") {
    const ConfigResult r = parse_config(std::string(kMinimal) +
                                        "[ic]\nscenario = a2\nu_lo = -10\nu_hi = 49.5\nv_lo = -10\nv_hi = 10\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "ic", "margin rule"));
  }
  SUBCASE("unknown key") {
    const ConfigResult r = parse_config(std::string(kMinimal) + "colour = red\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "model.colour", "known keys"));
  }
  SUBCASE("step above the monotone bound") {
    const ConfigResult r = parse_config(std::string(kMinimal) + "[grid]\ndt = 0.1\n");
    CHECK(has_issue(r, "grid.dt", "stability bound"));
  }
  SUBCASE("every problem is reported") {
    const ConfigResult r = parse_config("[model]\nd = -1\nr = 0\na = 2\nb = 3\n[output]\nrun_id = a b\n");
    CHECK(has_issue(r, "model.d", "positivity"));
    CHECK(has_issue(r, "model.r", "positivity"));
    CHECK(has_issue(r, "output.run_id", "identifier"));
  }
  SUBCASE("syntax error") {
    const ConfigResult r = parse_config("[model\nd = 1\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "", "syntax"));
  }
}

TEST_CASE("JSON input matches INI input") {
  const ConfigResult ini = parse_config(std::string(kMinimal) + "[analysis]\nbramson_t0 = 0,5,10\n");
  const ConfigResult js = parse_config(
      R"({"model": {"d": 1, "r": 1, "a": 2, "b": 3}, "analysis": {"bramson_t0": [0, 5, 10]}})");
  REQUIRE_MESSAGE(js.ok(), js.summary());
  REQUIRE(ini.ok());
  CHECK(config_to_keys(*js.config) == config_to_keys(*ini.config));
  CHECK(js.config->analysis.bramson_t0 == std::vector<double>{0, 5, 10});

  const ConfigResult bad = parse_config(R"({"model": {"d": {"x": 1}}})");
  CHECK(has_issue(bad, "model.d", "type"));
}

TEST_CASE("canonical INI round trip") {
  const ConfigResult r = parse_config(std::string(kMinimal) + "[grid]\ndt = matched\ndx = 0.1\n");
  REQUIRE_MESSAGE(r.ok(), r.summary());
  CHECK(r.config->dt_matched);
  CHECK(r.config->dt == doctest::Approx(kpp_matched_dt(1, 1, 0.1)).epsilon(1e-12));
  const std::string ini = config_to_ini(*r.config);
  const ConfigResult back = parse_config(ini);
  REQUIRE_MESSAGE(back.ok(), back.summary());
  CHECK(config_to_keys(*back.config) == config_to_keys(*r.config));
  CHECK(config_to_ini(*back.config) == ini);
}

TEST_CASE("overrides are re-validated") {
  const ExperimentConfig base = *parse_config(kMinimal).config;
  const ConfigResult ok = with_override(base, "model.b", "4");
  REQUIRE(ok.ok());
  CHECK(ok.config->model.b == 4.0);
  CHECK(base.model.b == 3.0);
  CHECK(has_issue(with_override(base, "model.b", "-4"), "model.b", "positivity"));
  CHECK(has_issue(with_override(base, "model.e", "1"), "model.e", "known keys"));
}

TEST_CASE("shipped presets validate") {
  const auto names = preset_names();
  REQUIRE(names.size() >= 4);
  for (const auto& n : names) {
    const ConfigResult r = load_config(preset_path(n));
    CHECK_MESSAGE(r.ok(), n << ": " << r.summary());
  }
  CHECK_FALSE(load_config("/nonexistent/cfg.ini").ok());
}
