#pragma once

#include <filesystem>
#include <iosfwd>

#include "newsclick/pipeline.hpp"

namespace newsclick {

/// Parses `key = value` lines plus a nested `learner { ... base { ... } }`
/// block. `#` starts a comment line. Relative paths resolve against
/// `base_dir`. Unknown keys, duplicate keys and bad values throw ParseError.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Writes a config that parse_config reads back to an equal PipelineConfig
/// (paths are written as given).
void write_config(const PipelineConfig& cfg, std::ostream& out);

LearnerKind parse_learner_kind(std::string_view name);
std::string_view learner_kind_name(LearnerKind k);

}  // namespace newsclick
