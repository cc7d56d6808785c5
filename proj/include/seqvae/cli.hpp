// Copyright 2026 The seqvae Authors.
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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqvae/data.hpp"
#include "seqvae/evaluation.hpp"
#include "seqvae/models.hpp"

namespace seqvae::cli {

/// Flat key=value settings. '#' starts a comment; blank lines are ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Merged settings for one command. Unknown keys raise ConfigError.
struct RunConfig {
  PipelineConfig pipeline;
  ModelConfig model;
  EvalOptions eval;

  void apply(const std::map<std::string, std::string>& settings);
  void set_seed(std::uint64_t seed);
  std::vector<std::pair<std::string, std::string>> pipeline_settings() const;
};

/// Entry point shared by the executable and the tests. Returns the process
/// exit status; errors are reported on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqvae::cli
