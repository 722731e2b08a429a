#pragma once

// Experiment config files: INI-style text with sections [protocol], [cds],
// [gp], [optimizer], [walker], [strategies], plus optional [persona.<name>]
// sections defining custom walkers. Unknown sections or keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cuelab/runner.hpp"

namespace cuelab::config {

/// Throws cuelab::Error(config) on malformed or invalid content.
runner::ExperimentConfig parse(std::istream& in);
runner::ExperimentConfig load(const std::filesystem::path& path);

/// Renders a config in the same format parse() reads.
std::string render(const runner::ExperimentConfig& config);

/// "1,2,5-8" -> {1,2,5,6,7,8}
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

} // namespace cuelab::config
