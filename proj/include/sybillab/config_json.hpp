#pragma once

// JSON forms of the configuration types. Unknown keys are rejected so typos
// in config files surface as errors instead of silently using defaults.

#include <filesystem>

#include "json.hpp"
#include "sybillab/gat.hpp"
#include "sybillab/synthesis.hpp"

namespace sybillab {

using json = nlohmann::json;

/// {"model": "ba", "n": .., "m": ..} | {"model": "pl", "n", "m", "p"} |
/// {"model": "file", "path": .., "direction": "union"|"mutual"}
json region_to_json(const RegionModel& model);
RegionModel region_from_json(const json& j);

/// {"edges_per_sybil", "p_targeted", "pdf": [..], "targets": "known"|"all"}
json attack_to_json(const AttackConfig& cfg);
AttackConfig attack_from_json(const json& j);

/// {"honest", "sybil", "attack", "train_fraction", "seed"}
json synth_to_json(const SynthSpec& spec);
SynthSpec synth_from_json(const json& j);

json hyper_to_json(const GatHyper& hyper);
/// Missing keys keep the values of `base`.
GatHyper hyper_from_json(const json& j, const GatHyper& base = {});

/// Parses a file, wrapping parse errors in IoError with the path.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

/// Makes relative file-region paths absolute against `base_dir`.
void resolve_region_paths(SynthSpec& spec, const std::filesystem::path& base_dir);

}  // namespace sybillab
