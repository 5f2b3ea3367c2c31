// Copyright 2026 The ClozeForge Authors.
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

// clozeforge <command> --config <path> [--set key=value ...] --seed <u64>

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clozeforge/commands.hpp"
#include "clozeforge/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"clozeforge: cloze-test reader training and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;

  for (const auto& name : clozeforge::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--set", overrides, "Override a config key, e.g. --set model.hidden_units=16");
    sub->add_option("--seed", seed, "Global seed")->required()->each([&](const std::string&) { seed_given = true; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  clozeforge::RunConfig config;
  try {
    config = clozeforge::load_config(config_path, overrides);
    if (seed_given) config.seed = seed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return clozeforge::exit_code_for(e);
  }
  return clozeforge::run_command(command, config, std::cout, std::cerr);
}
