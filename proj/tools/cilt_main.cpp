// cilt: reproducible experiment runner for the compactified imaginary
// Liouville laboratory. Subcommands mirror the experiment names; records are
// written as JSON with decimal-string numbers.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cilt/experiment.hpp"
#include "cilt/parallel.hpp"

using namespace cilt;

int main(int argc, char** argv) {
  CLI::App app{"cilt - compactified imaginary Liouville toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  const std::vector<std::string> experiments = {
      "dozz",        "df-integral",       "three-point",
      "gmc-moment",  "defect-invariance", "glue-annuli",
      "self-glue",   "instanton-sum",     "exp-moment"};
  for (const auto& name : experiments) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", out_dir, "output directory for the run record");
    sub->add_option("--threads", threads, "worker thread count");
  }

  auto* cmp = app.add_subcommand("compare", "compare two run records");
  std::string rec_a, rec_b;
  double tolerance = 1e-9;
  cmp->add_option("record_a", rec_a)->required();
  cmp->add_option("record_b", rec_b)->required();
  cmp->add_option("--tolerance", tolerance, "relative tolerance for exact values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (cmp->parsed()) {
      auto slurp = [](const std::string& p) {
        std::ifstream f(p);
        if (!f) throw std::invalid_argument("cannot open record: " + p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
      };
      auto a = RunRecord::from_json(slurp(rec_a));
      auto b = RunRecord::from_json(slurp(rec_b));
      auto rep = compare_records(a, b, tolerance);
      std::cout << rep.text;
      std::cout << (rep.ok ? "PASS" : "FAIL") << "\n";
      return rep.ok ? 0 : 1;
    }

    ExperimentConfig cfg = load_config(config_path);
    cfg.experiment = app.get_subcommands().front()->get_name();
    if (seed_set) cfg.seed = seed;
    if (threads > 0) {
      cfg.threads = threads;
    } else if (const char* env = std::getenv("CILT_THREADS")) {
      cfg.threads = std::atoi(env);
    }
    cfg.out_dir = out_dir;
    RunRecord rec = run_experiment(cfg);
    std::cout << rec.to_json() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
