#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "erdistill/core.hpp"
#include "erdistill/rng.hpp"

namespace erdistill::test {

inline Entity make_entity(std::string id, std::vector<std::pair<std::string, std::string>> attrs) {
    Entity e;
    e.id = std::move(id);
    for (auto& [name, value] : attrs) e.attributes.push_back({name, value});
    return e;
}

/// Tuple with candidates c1..cK at the given scores; trivial one-attribute
/// entities. truth < 0 means unlabeled.
inline Tuple scored_tuple(std::string query_id, std::vector<double> scores, int truth = -1) {
    Tuple t;
    t.query = make_entity(query_id, {{"name", "query " + query_id}});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::string cid = query_id + "-c" + std::to_string(i + 1);
        t.candidates.push_back({make_entity(cid, {{"name", "candidate " + cid}}), scores[i]});
    }
    if (truth >= 0) t.truth = truth;
    return validate_tuple(t);
}

/// Scratch directory wiped on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("erdistill-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

/// Path of the CLI binary, passed by ctest through the environment.
inline std::string cli_path() {
    const char* p = std::getenv("ERDISTILL_CLI");
    return p ? p : "";
}

}  // namespace erdistill::test
