#include "erdistill/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "erdistill/errors.hpp"

namespace erdistill {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// RFC-4180-ish CSV reader: quoted fields may contain commas, escaped quotes
// and newlines. Returns one record per call; line_no tracks the record's
// first physical line.
std::optional<std::vector<std::string>> read_csv_record(std::istream& in, std::size_t& line_no,
                                                        const std::filesystem::path& path) {
    int ch = in.get();
    if (ch == EOF) return std::nullopt;
    ++line_no;
    const std::size_t record_line = line_no;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    while (true) {
        if (ch == EOF) {
            if (in_quotes) {
                fail("ParseError", path.string() + ":" + std::to_string(record_line) +
                                       ": unterminated quoted field");
            }
            fields.push_back(std::move(field));
            return fields;
        }
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !quoted_field) {
            in_quotes = true;
            quoted_field = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            quoted_field = false;
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
        ch = in.get();
    }
}

std::vector<Entity> load_entities_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("ParseError", "cannot open '" + path.string() + "'");
    std::size_t line_no = 0;
    auto header = read_csv_record(in, line_no, path);
    if (!header) fail("ParseError", path.string() + ": empty file, expected a header row");
    std::size_t id_col = header->size();
    for (std::size_t i = 0; i < header->size(); ++i) {
        if ((*header)[i] == "id") {
            id_col = i;
            break;
        }
        if ((*header)[i].empty()) {
            fail("ParseError",
                 path.string() + ":1: empty column name in header at position " + std::to_string(i + 1));
        }
    }
    if (id_col == header->size()) {
        fail("MissingId", path.string() + ":1: no column named 'id' in header");
    }
    std::vector<Entity> out;
    while (auto record = read_csv_record(in, line_no, path)) {
        if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
        if (record->size() != header->size()) {
            fail("ParseError", path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(header->size()) + " fields, got " +
                                   std::to_string(record->size()));
        }
        Entity e;
        e.id = (*record)[id_col];
        if (e.id.empty()) {
            fail("MissingId", path.string() + ":" + std::to_string(line_no) + ": empty id");
        }
        for (std::size_t i = 0; i < record->size(); ++i) {
            if (i == id_col) continue;
            e.attributes.push_back({(*header)[i], (*record)[i]});
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::string json_value_to_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

std::vector<Entity> load_entities_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("ParseError", "cannot open '" + path.string() + "'");
    std::vector<Entity> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            fail("ParseError", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(entity_from_json(j, line_no));
    }
    return out;
}

void check_unique_ids(const std::vector<Entity>& entities, const std::filesystem::path& path) {
    std::unordered_set<std::string> seen;
    for (const Entity& e : entities) {
        if (!seen.insert(e.id).second) {
            fail("ParseError", path.string() + ": duplicate entity id '" + e.id + "'");
        }
    }
}

}  // namespace

EntityFormat entity_format_from_string(std::string_view s) {
    if (s == "csv") return EntityFormat::Csv;
    if (s == "jsonl") return EntityFormat::Jsonl;
    fail("ConfigError", "unknown entity format '" + std::string(s) + "' (expected csv or jsonl)");
}

EntityFormat guess_entity_format(const std::filesystem::path& path) {
    return lower_ext(path) == ".csv" ? EntityFormat::Csv : EntityFormat::Jsonl;
}

std::vector<Entity> load_entities(const std::filesystem::path& path, EntityFormat format) {
    auto entities = format == EntityFormat::Csv ? load_entities_csv(path) : load_entities_jsonl(path);
    check_unique_ids(entities, path);
    return entities;
}

Entity entity_from_json(const Json& j, std::size_t line_no) {
    if (!j.is_object()) {
        fail("ParseError", "line " + std::to_string(line_no) + ": expected a JSON object");
    }
    Entity e;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "id") {
            e.id = json_value_to_text(it.value());
            continue;
        }
        if (it.key().empty()) {
            fail("ParseError", "line " + std::to_string(line_no) + ": empty field name");
        }
        e.attributes.push_back({it.key(), json_value_to_text(it.value())});
    }
    if (e.id.empty()) {
        fail("MissingId", "line " + std::to_string(line_no) + ": missing or empty 'id' field");
    }
    return e;
}

Json entity_to_json(const Entity& e) {
    Json j = Json::object();
    j["id"] = e.id;
    for (const Attribute& a : e.attributes) j[a.name] = a.value;
    return j;
}

void save_entities(const std::filesystem::path& path, const std::vector<Entity>& entities) {
    std::vector<Json> lines;
    lines.reserve(entities.size());
    for (const Entity& e : entities) lines.push_back(entity_to_json(e));
    write_jsonl(path, lines);
}

std::string serialize_entity(const Entity& e) {
    std::string out;
    bool first = true;
    for (const Attribute& a : e.attributes) {
        if (!first) out += "; ";
        first = false;
        out += a.name;
        out += ':';
        if (!a.value.empty()) {
            out += ' ';
            for (char c : a.value) {
                if (c == '\\' || c == ';') out += '\\';
                out += c;
            }
        }
    }
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        bool word = std::isalnum(c) || c >= 0x80;
        if (word) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

// Sparse L2-normalized TF-IDF vector, term ids sorted for a linear-merge dot.
using SparseVec = std::vector<std::pair<int, double>>;

double dot(const SparseVec& a, const SparseVec& b) {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (a[i].first > b[j].first) {
            ++j;
        } else {
            s += a[i].second * b[j].second;
            ++i;
            ++j;
        }
    }
    return s;
}

}  // namespace

std::vector<Tuple> block_lexical(const std::vector<Entity>& queries,
                                 const std::vector<Entity>& corpus, int top_n) {
    if (corpus.empty()) fail("EmptyCorpus", "lexical blocker needs a non-empty corpus");
    if (top_n < 1) fail("ConfigError", "block_lexical top_n must be >= 1");

    // Vectorizer state is fit on every entity involved so scoring is a fixed,
    // symmetric function of the two texts.
    std::unordered_map<std::string, int> vocab;
    std::vector<int> df;
    auto doc_tokens = [&](const Entity& e) { return tokenize(serialize_entity(e)); };
    std::size_t n_docs = queries.size() + corpus.size();
    auto fit_doc = [&](const Entity& e) {
        std::unordered_set<std::string> uniq;
        for (auto& t : doc_tokens(e)) uniq.insert(std::move(t));
        for (const auto& t : uniq) {
            auto [it, inserted] = vocab.emplace(t, static_cast<int>(vocab.size()));
            if (inserted) df.push_back(0);
            ++df[static_cast<std::size_t>(it->second)];
        }
    };
    for (const Entity& e : queries) fit_doc(e);
    for (const Entity& e : corpus) fit_doc(e);

    std::vector<double> idf(df.size());
    for (std::size_t i = 0; i < df.size(); ++i) {
        idf[i] = std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df[i]))) + 1.0;
    }

    auto vectorize = [&](const Entity& e) {
        std::unordered_map<int, double> tf;
        for (const auto& t : doc_tokens(e)) {
            auto it = vocab.find(t);
            if (it != vocab.end()) tf[it->second] += 1.0;
        }
        SparseVec v;
        v.reserve(tf.size());
        double norm2 = 0.0;
        for (auto& [term, count] : tf) {
            double w = count * idf[static_cast<std::size_t>(term)];
            v.emplace_back(term, w);
            norm2 += w * w;
        }
        if (norm2 > 0.0) {
            double inv = 1.0 / std::sqrt(norm2);
            for (auto& [term, w] : v) w *= inv;
        }
        std::sort(v.begin(), v.end());
        return v;
    };

    std::vector<SparseVec> corpus_vecs;
    corpus_vecs.reserve(corpus.size());
    for (const Entity& e : corpus) corpus_vecs.push_back(vectorize(e));

    std::vector<Tuple> out;
    out.reserve(queries.size());
    for (const Entity& q : queries) {
        SparseVec qv = vectorize(q);
        std::vector<ScoredCandidate> scored;
        scored.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus[i].id == q.id) continue;
            double s = std::clamp(dot(qv, corpus_vecs[i]), 0.0, 1.0);
            scored.push_back({corpus[i], s});
        }
        if (scored.empty()) {
            fail("EmptyCorpus", "no corpus entity distinct from query '" + q.id + "'");
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const ScoredCandidate& a, const ScoredCandidate& b) {
                             if (a.score != b.score) return a.score > b.score;
                             return a.entity.id < b.entity.id;
                         });
        if (scored.size() > static_cast<std::size_t>(top_n)) {
            scored.resize(static_cast<std::size_t>(top_n));
        }
        out.push_back(validate_tuple(Tuple{q, std::move(scored), std::nullopt}));
    }
    std::sort(out.begin(), out.end(),
              [](const Tuple& a, const Tuple& b) { return a.key() < b.key(); });
    return out;
}

DatasetManifest dataset_manifest_from_json(const Json& j) {
    DatasetManifest m;
    m.name = j.value("name", "");
    if (j.contains("source_paths")) {
        const auto& sp = j.at("source_paths");
        if (!sp.is_array() || sp.size() != 2) {
            fail("ConfigError", "manifest source_paths must be a two-element array");
        }
        m.source_path_d1 = sp[0].get<std::string>();
        m.source_path_d2 = sp[1].get<std::string>();
    }
    if (j.contains("entity_count_per_source")) {
        m.entity_count_per_source = j.at("entity_count_per_source").get<std::vector<std::int64_t>>();
    }
    m.attribute_count = j.value("attribute_count", std::int64_t{0});
    if (j.contains("duplicate_count") && !j.at("duplicate_count").is_null()) {
        m.duplicate_count = j.at("duplicate_count").get<std::int64_t>();
    }
    return m;
}

Json dataset_manifest_to_json(const DatasetManifest& m) {
    Json j;
    j["name"] = m.name;
    j["source_paths"] = Json::array({m.source_path_d1, m.source_path_d2});
    j["entity_count_per_source"] = m.entity_count_per_source;
    j["attribute_count"] = m.attribute_count;
    if (m.duplicate_count) j["duplicate_count"] = *m.duplicate_count;
    return j;
}

void verify_manifest(const DatasetManifest& m, const std::vector<Entity>& d1,
                     const std::vector<Entity>& d2) {
    if (!m.entity_count_per_source.empty()) {
        if (m.entity_count_per_source.size() != 2 ||
            m.entity_count_per_source[0] != static_cast<std::int64_t>(d1.size()) ||
            m.entity_count_per_source[1] != static_cast<std::int64_t>(d2.size())) {
            fail("ManifestMismatch",
                 "manifest '" + m.name + "' entity counts do not match the loaded sources (" +
                     std::to_string(d1.size()) + ", " + std::to_string(d2.size()) + ")");
        }
    }
    if (m.attribute_count > 0) {
        auto check = [&](const std::vector<Entity>& src, const char* label) {
            for (const Entity& e : src) {
                if (static_cast<std::int64_t>(e.attributes.size()) != m.attribute_count) {
                    fail("ManifestMismatch", "manifest '" + m.name + "': entity '" + e.id +
                                                 "' in " + label + " has " +
                                                 std::to_string(e.attributes.size()) +
                                                 " attributes, expected " +
                                                 std::to_string(m.attribute_count));
                }
            }
        };
        check(d1, "D1");
        check(d2, "D2");
    }
}

namespace {

std::unordered_map<std::string, const Entity*> index_by_id(const std::vector<Entity>& entities) {
    std::unordered_map<std::string, const Entity*> idx;
    idx.reserve(entities.size());
    for (const Entity& e : entities) idx.emplace(e.id, &e);
    return idx;
}

}  // namespace

std::vector<Tuple> load_tuples(const std::filesystem::path& path, const std::vector<Entity>& d1,
                               const std::vector<Entity>& d2) {
    auto queries = index_by_id(d1);
    auto cands = index_by_id(d2);
    std::vector<Tuple> out;
    for (const Json& line : read_jsonl(path)) {
        if (!line.is_object() || !line.contains("query") || !line.contains("candidates")) {
            fail("ParseError", path.string() + ": tuple line needs 'query' and 'candidates'");
        }
        Tuple t;
        std::string qid = json_value_to_text(line.at("query"));
        auto qit = queries.find(qid);
        if (qit == queries.end()) fail("UnknownEntityId", "query id '" + qid + "'");
        t.query = *qit->second;
        for (const Json& c : line.at("candidates")) {
            std::string cid = json_value_to_text(c.at("id"));
            auto cit = cands.find(cid);
            if (cit == cands.end()) fail("UnknownEntityId", "candidate id '" + cid + "'");
            t.candidates.push_back({*cit->second, c.at("score").get<double>()});
        }
        if (line.contains("truth")) {
            t.truth = line.at("truth").is_null() ? 0 : line.at("truth").get<int>();
        }
        out.push_back(validate_tuple(std::move(t)));
    }
    return out;
}

Json tuple_to_json(const Tuple& t) {
    Json j;
    j["query"] = t.query.id;
    Json cands = Json::array();
    for (const ScoredCandidate& c : t.candidates) {
        cands.push_back(Json{{"id", c.entity.id}, {"score", c.score}});
    }
    j["candidates"] = std::move(cands);
    if (t.truth) {
        if (*t.truth == 0) {
            j["truth"] = nullptr;
        } else {
            j["truth"] = *t.truth;
        }
    }
    return j;
}

void save_tuples(const std::filesystem::path& path, const std::vector<Tuple>& tuples) {
    std::vector<Json> lines;
    lines.reserve(tuples.size());
    for (const Tuple& t : tuples) lines.push_back(tuple_to_json(t));
    write_jsonl(path, lines);
}

}  // namespace erdistill
