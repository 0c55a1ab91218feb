#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "erdistill/core.hpp"
#include "erdistill/jsonl.hpp"

namespace erdistill {

enum class EntityFormat { Csv, Jsonl };

/// Picks csv/jsonl from an explicit name or a file extension.
EntityFormat entity_format_from_string(std::string_view s);
EntityFormat guess_entity_format(const std::filesystem::path& path);

/// Loads one entity collection. CSV needs a header row with an "id" column;
/// JSONL needs an "id" field per object. All other columns/fields become
/// attributes in source order. Errors: ParseError (with line number),
/// MissingId.
std::vector<Entity> load_entities(const std::filesystem::path& path, EntityFormat format);

/// Deterministic one-line text form: `name1: value1; name2: value2`, empty
/// values rendered as `name:`. Literal `\` and `;` in values are escaped as
/// `\\` and `\;` so distinct value lists never collide.
std::string serialize_entity(const Entity& e);

/// Self-contained lexical blocker for offline runs: top_n corpus entities per
/// query by cosine similarity over token TF-IDF vectors of the serialized
/// text. Scores are clamped into [0,1]; output tuples are canonical and
/// ordered by query id. Corpus entities sharing a query's id are skipped.
std::vector<Tuple> block_lexical(const std::vector<Entity>& queries,
                                 const std::vector<Entity>& corpus, int top_n);

/// Summary of a two-source dataset; counts must match the loaded data.
struct DatasetManifest {
    std::string name;
    std::string source_path_d1;
    std::string source_path_d2;
    std::vector<std::int64_t> entity_count_per_source;  // [|D1|, |D2|]
    std::int64_t attribute_count = 0;
    std::optional<std::int64_t> duplicate_count;
};

DatasetManifest dataset_manifest_from_json(const Json& j);
Json dataset_manifest_to_json(const DatasetManifest& m);

/// Throws ManifestMismatch when a present count disagrees with the data.
void verify_manifest(const DatasetManifest& m, const std::vector<Entity>& d1,
                     const std::vector<Entity>& d2);

// --- tuple file IO ------------------------------------------------------
// Schema per line:
//   {"query": id, "candidates": [{"id": id, "score": s}, ...], "truth": int|null}
// truth null means "no match among the candidates"; an absent truth means
// unlabeled. An optional "presumed" tag ("positive"|"negative") is ignored
// on load. Candidates are resolved against the loaded collections
// (UnknownEntityId) and every tuple is validated and canonicalized; a truth
// index refers to the line's candidate order and is remapped.
std::vector<Tuple> load_tuples(const std::filesystem::path& path,
                               const std::vector<Entity>& d1,
                               const std::vector<Entity>& d2);

Json tuple_to_json(const Tuple& t);
void save_tuples(const std::filesystem::path& path, const std::vector<Tuple>& tuples);

Json entity_to_json(const Entity& e);
Entity entity_from_json(const Json& j, std::size_t line_no);
void save_entities(const std::filesystem::path& path, const std::vector<Entity>& entities);

}  // namespace erdistill
