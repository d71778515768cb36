// cmem: run the built-in or file-defined experiments and write traces.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmem/cmem.hpp"

namespace {

struct Overrides {
  std::optional<double> kl_threshold;
  std::optional<std::size_t> max_iter;
};

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

cmem::ExperimentSpec resolve(const std::string& target) {
  if (auto s = cmem::find_builtin(target)) return *s;
  if (std::filesystem::exists(target)) return cmem::load_experiment(target);
  throw cmem::Error(cmem::ErrorCode::config, "no built-in experiment or file named '" + target + "'");
}

void apply(cmem::ExperimentSpec& spec, const Overrides& o) {
  if (o.kl_threshold) spec.fit.kl_threshold = spec.cm.kl_threshold = *o.kl_threshold;
  if (o.max_iter) {
    spec.fit.max_iterations = *o.max_iter;
    spec.cm.max_outer = *o.max_iter;
    spec.classify.max_rounds = *o.max_iter;
  }
}

void report(const cmem::ExperimentOutcome& o, const std::string& format) {
  if (format == "json") {
    std::cout << cmem::to_json(o.summary).dump(2) << "\n";
    return;
  }
  std::cout << o.trace_csv;
}

int run_targets(std::vector<std::string> targets, const Overrides& o, const std::string& out_dir,
                const std::string& format, bool parallel) {
  if (targets.size() == 1 && targets.front() == "all") {
    targets.clear();
    for (const auto& s : cmem::builtin_registry()) targets.push_back(s.name);
  }
  std::vector<cmem::ExperimentSpec> specs;
  for (const auto& t : targets) {
    specs.push_back(resolve(t));
    apply(specs.back(), o);
    specs.back().validate();
  }

  auto one = [&](const cmem::ExperimentSpec& spec) {
    auto outcome = cmem::run_experiment(spec);
    cmem::write_outputs(outcome, out_dir);
    return outcome;
  };
  std::vector<cmem::ExperimentOutcome> outcomes;
  if (parallel) {
    std::vector<std::future<cmem::ExperimentOutcome>> jobs;
    for (const auto& s : specs) jobs.push_back(std::async(std::launch::async, one, std::cref(s)));
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (const auto& s : specs) outcomes.push_back(one(s));
  }

  int status = kExitOk;
  for (const auto& oc : outcomes) {
    report(oc, format);
    std::cerr << oc.summary.name << ": " << (oc.summary.converged ? "converged" : "NOT converged") << " ("
              << oc.summary.stop_reason << ", " << oc.summary.iterations << " iterations)\n";
    if (!oc.summary.converged) status = kExitNotConverged;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-model fitting with EM, MM and CM-EM, plus MMI classification"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string out_dir = "results";
  std::string format = "csv";
  bool parallel = false;
  app.add_option("--kl-threshold", overrides.kl_threshold, "KL stopping threshold in bits")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iter", overrides.max_iter, "cap on outer iterations / classification rounds")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "directory for trace CSV and summary JSON");
  app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--parallel", parallel, "run independent experiments concurrently");

  std::vector<std::string> run_targets_arg;
  auto* run = app.add_subcommand("run", "run experiments by name or config file ('all' for every built-in)");
  run->add_option("targets", run_targets_arg)->required();

  app.add_subcommand("list", "list built-in experiments");

  std::string compare_target;
  auto* compare = app.add_subcommand("compare", "EM vs MM vs CM-EM on one experiment");
  compare->add_option("name", compare_target)->required();

  std::string classify_target;
  auto* classify = app.add_subcommand("classify", "MMI classification on a fitted model");
  classify->add_option("name", classify_target)->required();

  std::string qtable_target = "table1-counterexample";
  auto* qtable = app.add_subcommand("qtable", "Q/N for mismatched left/right sigma pairs");
  qtable->add_option("name", qtable_target);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return run_targets(run_targets_arg, overrides, out_dir, format, parallel);

    if (app.got_subcommand("list")) {
      for (const auto& s : cmem::builtin_registry()) {
        std::cout << s.name << "\t" << cmem::to_string(s.algorithm) << "\n";
      }
      return kExitOk;
    }

    if (compare->parsed()) {
      auto spec = resolve(compare_target);
      apply(spec, overrides);
      const auto c = cmem::compare_algorithms(spec);
      if (format == "json") {
        nlohmann::json j;
        j["experiment"] = c.name;
        for (auto [label, r] : {std::pair{"EM", &c.em}, {"MM", &c.mm}, {"CM-EM", &c.cmem}}) {
          j[label] = {{"iterations", r->iterations},
                      {"converged", r->converged},
                      {"KL", r->final_measures().kl},
                      {"final_model", cmem::to_json(r->final_model)}};
        }
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << cmem::format_comparison(c);
      }
      return c.em.converged && c.mm.converged && c.cmem.converged ? kExitOk : kExitNotConverged;
    }

    if (classify->parsed()) {
      auto spec = resolve(classify_target);
      if (spec.algorithm != cmem::Algorithm::CLASSIFY) {
        throw cmem::Error(cmem::ErrorCode::config, "'" + spec.name + "' is not a classification experiment");
      }
      return run_targets({classify_target}, overrides, out_dir, format, false);
    }

    if (qtable->parsed()) {
      auto spec = resolve(qtable_target);
      if (spec.algorithm != cmem::Algorithm::QTABLE) {
        throw cmem::Error(cmem::ErrorCode::config, "'" + spec.name + "' is not a qtable experiment");
      }
      return run_targets({qtable_target}, overrides, out_dir, format, false);
    }
  } catch (const cmem::Error& e) {
    std::cerr << "error [" << cmem::to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == cmem::ErrorCode::config ? kExitUsage : kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
