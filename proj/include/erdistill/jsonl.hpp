#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace erdistill {

// Order-preserving JSON everywhere: entity attribute order is significant and
// emitted files keep a stable field layout.
using Json = nlohmann::ordered_json;

/// Reads a line-delimited JSON file. Blank lines are skipped; a malformed
/// line raises ParseError naming the file and 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Writes one compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses a whole-file JSON document (configs, templates, manifests).
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

/// SHA-256 of a file's bytes, lowercase hex. Used for run-manifest digests.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace erdistill
