#include <cmath>

#include "cilt/experiment.hpp"
#include "doctest.h"

using namespace cilt;

namespace {

const char* kDozzConfig = R"(
seed = 7
[params]
p = 1
q = 9
k = 1
mu = 1
[charges]
alpha1 = -2
alpha2 = -2
alpha3 = -2
[numeric]
s = 1
)";

}  // namespace

TEST_CASE("config parsing: sections, rationals, comments") {
  auto cfg = parse_config("experiment = dozz\nseed = 11\n[numeric]\n# c\nx = 3/4\ny = 2");
  CHECK(cfg.experiment == "dozz");
  CHECK(cfg.seed == 11);
  CHECK(cfg.at("numeric.x").as_real() == doctest::Approx(0.75));
  CHECK(cfg.at("numeric.x").rat_num() == 3);
  CHECK(cfg.at("numeric.x").rat_den() == 4);
  CHECK(cfg.at("numeric.y").as_int() == 2);
  CHECK_THROWS_AS(parse_config("no equals sign"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigValue{"2.5"}.as_int(), std::invalid_argument);
  CHECK(ConfigValue{"1.5-0.25i"}.as_complex() == Complex{1.5, -0.25});
}

TEST_CASE("dozz experiment record and the -pi mu / l(2/3)^3 value") {
  auto cfg = parse_config(kDozzConfig);
  cfg.experiment = "dozz";
  auto rec = run_experiment(cfg);
  const double lref = std::tgamma(2.0 / 3.0) / std::tgamma(1.0 / 3.0);
  const double expect = -PI / (lref * lref * lref);
  CHECK(rec.results.at("dozz_value").value.real() ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("unknown keys are rejected with their paths") {
  auto cfg = parse_config(kDozzConfig);
  cfg.experiment = "dozz";
  cfg.keys["numeric.bogus"] = ConfigValue{"1"};
  try {
    run_experiment(cfg);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("numeric.bogus") != std::string::npos);
  }
}

TEST_CASE("record JSON roundtrip and byte determinism") {
  auto cfg = parse_config(kDozzConfig);
  cfg.experiment = "dozz";
  auto rec1 = run_experiment(cfg);
  auto rec2 = run_experiment(cfg);
  rec1.wall_seconds = rec2.wall_seconds = 0.0;  // timing is not part of the contract
  CHECK(rec1.to_json() == rec2.to_json());

  auto back = RunRecord::from_json(rec1.to_json());
  CHECK(back.experiment == rec1.experiment);
  CHECK(back.results.at("dozz_value").value == rec1.results.at("dozz_value").value);
  CHECK(back.to_json() == rec1.to_json());
}

TEST_CASE("record comparison: identical, sigma-aware, deterministic breach") {
  auto cfg = parse_config(kDozzConfig);
  cfg.experiment = "dozz";
  auto a = run_experiment(cfg);
  auto b = a;
  CHECK(compare_records(a, b, 1e-9).ok);

  // MC-style entries compare through overlapping 3 sigma intervals
  RunRecord ma = a, mb = a;
  ma.results["mc"] = {Complex{1.00, 0}, 0.05, "mc", false};
  mb.results["mc"] = {Complex{1.10, 0}, 0.05, "mc", false};
  CHECK(compare_records(ma, mb, 1e-9).ok);
  mb.results["mc"].value = {1.5, 0};
  CHECK(!compare_records(ma, mb, 1e-9).ok);

  // deterministic entries breach on relative difference, naming the field
  auto c = a;
  c.results["dozz_value"].value += 1e-2;
  auto rep = compare_records(a, c, 1e-6);
  CHECK(!rep.ok);
  CHECK(rep.text.find("dozz_value") != std::string::npos);

  auto d = a;
  d.experiment = "df-integral";
  CHECK(!compare_records(a, d, 1e-6).ok);
}

TEST_CASE("instanton experiment against the 1-D theta-square oracle") {
  auto cfg = parse_config(
      "seed = 1\n[geometry]\ntau_re = 0\ntau_im = 1\n[numeric]\nradius = 1\ncutoff = 6");
  cfg.experiment = "instanton-sum";
  auto rec = run_experiment(cfg);
  double theta = 0;
  for (long long n = -6; n <= 6; ++n) theta += std::exp(-PI * (double)(n * n));
  CHECK(rec.results.at("instanton_sum").value.real() ==
        doctest::Approx(theta * theta).epsilon(1e-12));
}
