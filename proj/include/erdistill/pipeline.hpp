#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "erdistill/jsonl.hpp"
#include "erdistill/rng.hpp"
#include "erdistill/selection.hpp"
#include "erdistill/teaching.hpp"

namespace erdistill {

inline constexpr std::string_view kToolName = "erdistill";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Env var that overrides every llm_endpoint teacher's URL for a run.
inline constexpr const char* kEndpointEnvVar = "DISTILLER_ENDPOINT";

/// Applies the DISTILLER_ENDPOINT override (when set) to the descriptor and
/// its members.
void apply_endpoint_override(TeacherDescriptor& d);

/// Seed a stage gets out of the master seed.
inline std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
    return derive_seed(master, stage);
}

/// Writes selection outputs: tuples plus a "presumed" tag on training lines.
void save_selection(const std::filesystem::path& training_path,
                    const std::filesystem::path& testing_path, const SelectionOutcome& outcome);

SelectionConfig selection_config_from_json(const Json& j, std::uint64_t default_seed);

/// Runs select-data → annotate → build artifacts → optional disambiguate →
/// evaluate from one config file, writing every intermediate JSONL file plus
/// a run manifest (config snapshot, per-stage seeds, input/output digests,
/// wall-clock stage timings) under out_dir. Returns the manifest.
///
/// Config sections (all six must be present): ingest, selection, teacher,
/// template, distill, eval. A stage failure surfaces the first error with the
/// stage name attached.
Json run_pipeline(const std::filesystem::path& config_path,
                  const std::optional<std::filesystem::path>& out_dir_override = std::nullopt,
                  std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace erdistill
