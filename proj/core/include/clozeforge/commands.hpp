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

#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "clozeforge/config.hpp"
#include "clozeforge/evaluation.hpp"
#include "clozeforge/model.hpp"
#include "clozeforge/ngram_index.hpp"

namespace clozeforge {

// build-ngrams, generate, train, eval, ensemble, ablate.
const std::vector<std::string>& command_names();

// 2 for ConfigError, 3 for DataError/ShapeError and I/O failures, 4 for
// NumericError, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Runs one command and maps failures to exit codes, reporting them on
/// `err`. Every command writes "<output_dir>/<command>.manifest.json" holding
/// the resolved configuration and the command's summary.
int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& err);

// The individual commands throw instead of returning exit codes.
void cmd_build_ngrams(const RunConfig& config, std::ostream& out);
void cmd_generate(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
EvalReport cmd_eval(const RunConfig& config, std::ostream& out);
EvalReport cmd_ensemble(const RunConfig& config, std::ostream& out);
AblationTable cmd_ablate(const RunConfig& config, std::ostream& out);

// Checkpoint metadata written by train: {"model": ..., "vocab": ..., "seed": ...}.
std::string checkpoint_metadata(const ModelConfig& model, const Vocab& vocab, std::uint64_t seed);
MpNet load_model(const std::filesystem::path& checkpoint);

}  // namespace clozeforge
