// Copyright 2026 The Perspex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// perspex: command-line driver for the annotator-aware pipeline.
//
//   perspex synth --out run
//   perspex train-classifier --config cfg.json --out run
//   perspex train-explainer --mode bridge --out run
//
// Every command prints its result record on stdout. Failures print one
// JSON error record on stderr and exit nonzero.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "perspex/error.hpp"
#include "perspex/pipeline.hpp"

namespace {

using perspex::pipeline::RunConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Seed override");
  cmd->add_option("--out", f.out, "Output directory override");
  cmd->add_flag("--verbose,-v", f.verbose, "Per-epoch progress on stderr");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : perspex::pipeline::load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out = f.out;
  cfg.resolve();
  cfg.validate();
  return cfg;
}

void error_record(const std::string& command, const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"command", command}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annotator-aware label-set classification and rationale generation"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string release;
  std::string mode_name = "posthoc";

  auto* import = app.add_subcommand("import", "Convert a LeWiDi VariErrNLI release to the canonical corpus");
  import->add_option("--release", release, "Release directory")->required()->check(CLI::ExistingDirectory);
  auto* synth = app.add_subcommand("synth", "Generate the synthetic persona corpus and its answer key");
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  auto* train_cls = app.add_subcommand("train-classifier", "Train the classifier and dump dev/test probabilities");
  auto* tune = app.add_subcommand("tune-thresholds", "Grid-search decision thresholds on dev");
  auto* train_exp = app.add_subcommand("train-explainer", "Train a rationale generator");
  auto* generate = app.add_subcommand("generate", "Generate rationales for the evaluation split");
  auto* evaluate = app.add_subcommand("evaluate", "Per-annotator and aggregated metrics");
  auto* faith = app.add_subcommand("faithfulness", "Faithfulness scores and histograms");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");

  for (auto* cmd : {import, synth, stats, train_cls, tune, train_exp, generate, evaluate, faith, gradcheck}) {
    add_common(cmd, flags);
  }
  for (auto* cmd : {train_exp, generate, evaluate, faith}) {
    cmd->add_option("--mode", mode_name, "posthoc or bridge")->check(CLI::IsMember({"posthoc", "bridge"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name(), "usage_error",
                 e.what());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    namespace pl = perspex::pipeline;
    const RunConfig cfg = resolve(flags);
    std::ostream* log = flags.verbose ? &std::cerr : nullptr;
    const auto mode = perspex::explainer::parse_mode(mode_name);
    nlohmann::json result;
    if (command == "import") result = pl::cmd_import(cfg, release);
    else if (command == "synth") result = pl::cmd_synth(cfg);
    else if (command == "stats") result = pl::cmd_stats(cfg);
    else if (command == "train-classifier") result = pl::cmd_train_classifier(cfg, log);
    else if (command == "tune-thresholds") result = pl::cmd_tune_thresholds(cfg);
    else if (command == "train-explainer") result = pl::cmd_train_explainer(cfg, mode, log);
    else if (command == "generate") result = pl::cmd_generate(cfg, mode);
    else if (command == "evaluate") result = pl::cmd_evaluate(cfg, mode);
    else if (command == "faithfulness") result = pl::cmd_faithfulness(cfg, mode);
    else if (command == "gradcheck") result = pl::cmd_gradcheck(cfg);
    std::cout << result.dump() << "\n";
    return 0;
  } catch (const perspex::Error& e) {
    error_record(command, e.kind(), e.what());
  } catch (const std::exception& e) {
    error_record(command, "internal_error", e.what());
  }
  return 1;
}
