#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "visitlab/error.hpp"
#include "visitlab/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed, samples;
  std::optional<unsigned> jobs;
  std::optional<std::string> out_dir;
  std::optional<double> tolerance;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) visitlab::fail(visitlab::ErrorKind::config, "cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    visitlab::fail(visitlab::ErrorKind::config, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

int run(visitlab::Verb verb, const Flags& f) {
  nlohmann::json raw = read_json(f.config);
  // Flags override the file so the hash and report reflect what actually ran.
  if (f.seed) raw["seed"] = *f.seed;
  if (f.samples) raw["samples"] = *f.samples;
  if (f.jobs) raw["workers"] = *f.jobs;
  if (f.tolerance) raw["tolerance"] = *f.tolerance;
  if (f.out_dir) raw["output"]["dir"] = *f.out_dir;
  const visitlab::ExperimentConfig cfg = visitlab::parse_config(raw);
  const visitlab::RunOutcome out = visitlab::run_verb(verb, cfg);
  visitlab::write_outputs(out, cfg.out_dir);

  const auto& body = out.report["body"];
  std::cout << visitlab::to_string(verb) << ": " << body["system"].get<std::string>() << " / "
            << body["target_family"].get<std::string>() << '\n';
  if (body.contains("levels")) {
    for (const auto& lv : body["levels"]) {
      std::cout << "  level " << lv["level"].get<double>() << "  mu=" << lv["measure"]["value"].get<double>()
                << "  N=" << lv["horizon"].get<std::uint64_t>();
      if (lv.contains("tv"))
        std::cout << "  tv=" << lv["tv"]["value"].get<double>() << " [" << lv["tv"]["band_lo"].get<double>() << ", "
                  << lv["tv"]["band_hi"].get<double>() << "]  " << (lv["pass"].get<bool>() ? "pass" : "FAIL");
      std::cout << '\n';
    }
  }
  if (body.contains("rows"))
    for (const auto& r : body["rows"])
      std::cout << "  n=" << r["n"].get<std::size_t>() << "  bracket=" << r["bracket"].get<double>()
                << "  argmin_delta=" << r["argmin_delta"].get<std::uint64_t>() << '\n';
  if (body.contains("prediction"))
    std::cout << "  predicted: " << body["prediction"]["family"].get<std::string>()
              << "  extremal_index=" << body["prediction"]["extremal_index"].get<double>() << '\n';
  std::cout << "  report: " << cfg.out_dir << "/report.json\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"visitlab: clustered visit statistics for dynamical systems"};
  app.set_version_flag("--version", std::string(VISITLAB_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const std::pair<visitlab::Verb, const char*> verbs[] = {
      {visitlab::Verb::predict, "Compute the predicted limit law only"},
      {visitlab::Verb::simulate, "Simulate visit counts and estimate cluster statistics"},
      {visitlab::Verb::compare, "Simulate and compare against the prediction"},
      {visitlab::Verb::bound, "Tabulate the optimized error bracket over the sweep"},
      {visitlab::Verb::sweep, "Compare across the sweep and write a summary table"},
  };
  std::optional<visitlab::Verb> chosen;
  for (const auto& [verb, help] : verbs) {
    CLI::App* sub = app.add_subcommand(visitlab::to_string(verb), help);
    sub->add_option("--config,-c", flags.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Override the base seed");
    sub->add_option("--samples", flags.samples, "Override the number of trajectories");
    sub->add_option("--jobs,-j", flags.jobs, "Worker threads");
    sub->add_option("--out-dir,-o", flags.out_dir, "Output directory");
    sub->add_option("--tolerance", flags.tolerance, "TV tolerance for pass/fail");
    sub->callback([&chosen, v = verb] { chosen = v; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    return run(*chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "visitlab: " << e.what() << '\n';
    return visitlab::exit_code_for(e);
  }
}
