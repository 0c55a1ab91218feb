#include "erdistill/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "erdistill/errors.hpp"
#include "erdistill/rng.hpp"

namespace erdistill {

std::string to_string(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::Random: return "random";
        case SelectionStrategy::RankMax: return "rank_max";
        case SelectionStrategy::RankTop2: return "rank_top2";
        case SelectionStrategy::ClusterKmeans: return "cluster_kmeans";
        case SelectionStrategy::ClusterAgglomerative: return "cluster_agglomerative";
        case SelectionStrategy::Sampled: return "sampled";
    }
    return "random";
}

SelectionStrategy selection_strategy_from_string(std::string_view s) {
    if (s == "random") return SelectionStrategy::Random;
    if (s == "rank_max") return SelectionStrategy::RankMax;
    if (s == "rank_top2") return SelectionStrategy::RankTop2;
    if (s == "cluster_kmeans") return SelectionStrategy::ClusterKmeans;
    if (s == "cluster_agglomerative") return SelectionStrategy::ClusterAgglomerative;
    if (s == "sampled") return SelectionStrategy::Sampled;
    fail("ConfigError", "unknown selection strategy '" + std::string(s) + "'");
}

void validate_config(const SelectionConfig& config) {
    const double total = config.p_fraction + config.n_fraction;
    if (!(total > 0.0 && total <= 1.0)) {
        fail("ConfigError", "selection requires 0 < p + n <= 1");
    }
    if (config.p_fraction < 0.0 || config.n_fraction < 0.0) {
        fail("ConfigError", "selection fractions must be non-negative");
    }
    if (config.bins < 2) fail("ConfigError", "selection bins must be >= 2");
}

std::string to_string(PresumedLabel label) {
    switch (label) {
        case PresumedLabel::Positive: return "positive";
        case PresumedLabel::Negative: return "negative";
        case PresumedLabel::Unset: return "unset";
    }
    return "unset";
}

double score_max(const Tuple& t) {
    double best = 0.0;
    for (const auto& c : t.candidates) best = std::max(best, c.score);
    return best;
}

double score_top2(const Tuple& t) {
    if (t.candidates.size() == 1) return t.candidates.front().score;
    double first = -1.0, second = -1.0;
    for (const auto& c : t.candidates) {
        if (c.score > first) {
            second = first;
            first = c.score;
        } else if (c.score > second) {
            second = c.score;
        }
    }
    return (first + second) / 2.0;
}

std::vector<int> histogram_vector(const Tuple& t, int bins) {
    if (bins < 2) fail("ConfigError", "histogram_vector needs bins >= 2");
    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    for (const auto& c : t.candidates) {
        int idx = static_cast<int>(c.score * bins);
        // Correct against the true edges i/b so binary rounding of e.g. 0.7
        // cannot shift a score across a decimal bin boundary.
        while (idx < bins - 1 && c.score >= static_cast<double>(idx + 1) / bins) ++idx;
        while (idx > 0 && c.score < static_cast<double>(idx) / bins) --idx;
        idx = std::clamp(idx, 0, bins - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

double positive_ratio(const std::vector<Tuple>& tuples) {
    if (tuples.empty()) fail("TruthRequired", "positive_ratio of an empty tuple list");
    std::size_t positive = 0;
    for (const Tuple& t : tuples) {
        if (!t.truth) fail("TruthRequired", "tuple '" + t.key() + "' carries no truth");
        if (*t.truth >= 1) ++positive;
    }
    return static_cast<double>(positive) / static_cast<double>(tuples.size());
}

namespace {

std::size_t take_count(double fraction, std::size_t pool) {
    return static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(pool) - 1e-9));
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Two-means with k-means++ seeding on the histogram vectors. Returns the
// 0/1 assignment; on a collapsed cluster the farthest point from the
// surviving centroid is reassigned and a warning is recorded.
std::vector<int> kmeans_two(const std::vector<std::vector<double>>& points, Rng& rng,
                            std::vector<std::string>& warnings) {
    const std::size_t n = points.size();
    std::vector<int> assign(n, 0);
    if (n < 2) return assign;

    std::size_t first = static_cast<std::size_t>(rng.uniform_int(n));
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = sq_dist(points[i], points[first]);
        total += d2[i];
    }
    std::size_t second = first;
    if (total > 0.0) {
        double r = rng.uniform_real() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= r) {
                second = i;
                break;
            }
        }
        if (second == first) {
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] > 0.0) second = i;
            }
        }
    } else {
        second = (first + 1) % n;  // all points identical
    }

    std::vector<std::vector<double>> centroids{points[first], points[second]};
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = sq_dist(points[i], centroids[0]) <= sq_dist(points[i], centroids[1]) ? 0 : 1;
            if (best != assign[i]) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(2, std::vector<double>(points[0].size(), 0.0));
        std::size_t counts[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < points[i].size(); ++d) sums[assign[i]][d] += points[i][d];
        }
        for (int c = 0; c < 2; ++c) {
            if (counts[c] == 0) continue;
            for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
            centroids[c] = std::move(sums[c]);
        }
        if (counts[0] == 0 || counts[1] == 0) {
            int empty = counts[0] == 0 ? 0 : 1;
            int full = 1 - empty;
            std::size_t farthest = 0;
            double best = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = sq_dist(points[i], centroids[full]);
                if (d > best) {
                    best = d;
                    farthest = i;
                }
            }
            assign[farthest] = empty;
            warnings.push_back("ClusterCollapse: one k-means cluster was empty; reassigned the "
                               "farthest tuple to restore two clusters");
            break;
        }
        if (!changed) break;
    }
    return assign;
}

// Agglomerative clustering with Ward linkage, merged until two clusters
// remain. Distances start as squared Euclidean and follow the Lance-Williams
// Ward recurrence, which keeps every entry at twice the Ward merge cost —
// the argmin is the Ward merge.
std::vector<int> ward_two(const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    std::vector<int> assign(n, 0);
    if (n < 2) return assign;

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[i][j] = dist[j][i] = sq_dist(points[i], points[j]);
        }
    }
    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};

    std::size_t clusters = n;
    while (clusters > 2) {
        double best = std::numeric_limits<double>::max();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        const double si = static_cast<double>(size[bi]);
        const double sj = static_cast<double>(size[bj]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double sk = static_cast<double>(size[k]);
            const double denom = si + sj + sk;
            dist[bi][k] = dist[k][bi] = ((si + sk) * dist[bi][k] + (sj + sk) * dist[bj][k] -
                                         sk * dist[bi][bj]) /
                                        denom;
        }
        active[bj] = false;
        size[bi] += size[bj];
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        --clusters;
    }
    int label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (std::size_t m : members[i]) assign[m] = label;
        ++label;
    }
    return assign;
}

std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t take,
                                                    Rng& rng) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(std::min(take, population));
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

SelectionOutcome select(const std::vector<Tuple>& pool, const SelectionConfig& config) {
    validate_config(config);
    if (pool.empty()) fail("ConfigError", "selection pool is empty");

    // Canonical processing order: query id ascending. Makes the outcome
    // independent of the caller's pool permutation.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool[a].key() < pool[b].key();
    });

    const std::size_t n = pool.size();
    const std::size_t want_pos = take_count(config.p_fraction, n);
    const std::size_t want_neg = take_count(config.n_fraction, n);

    SelectionOutcome out;
    Rng rng(config.seed);

    // presumed[i] over the sorted order; Unset plus in_training=false => testing.
    std::vector<PresumedLabel> presumed(n, PresumedLabel::Unset);
    std::vector<bool> in_training(n, false);

    switch (config.strategy) {
        case SelectionStrategy::RankMax:
        case SelectionStrategy::RankTop2: {
            auto scorer = config.strategy == SelectionStrategy::RankMax ? score_max : score_top2;
            // Rank the order-positions 0..n-1 by score descending, ties by
            // query id (order is already id-sorted, so stable sort keeps it).
            std::vector<std::size_t> ranked(n);
            std::iota(ranked.begin(), ranked.end(), 0);
            std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
                return scorer(pool[order[a]]) > scorer(pool[order[b]]);
            });
            const std::size_t pos = std::min(want_pos, n);
            const std::size_t neg = std::min(want_neg, n - pos);
            for (std::size_t i = 0; i < pos; ++i) {
                presumed[ranked[i]] = PresumedLabel::Positive;
                in_training[ranked[i]] = true;
            }
            for (std::size_t i = 0; i < neg; ++i) {
                presumed[ranked[n - 1 - i]] = PresumedLabel::Negative;
                in_training[ranked[n - 1 - i]] = true;
            }
            break;
        }
        case SelectionStrategy::ClusterKmeans:
        case SelectionStrategy::ClusterAgglomerative: {
            std::vector<std::vector<double>> vectors;
            vectors.reserve(n);
            for (std::size_t idx : order) {
                auto counts = histogram_vector(pool[idx], config.bins);
                vectors.emplace_back(counts.begin(), counts.end());
            }
            std::vector<int> assign = config.strategy == SelectionStrategy::ClusterKmeans
                                          ? kmeans_two(vectors, rng, out.warnings)
                                          : ward_two(vectors);
            // The positive cluster is the one whose members have the higher
            // mean max-score.
            double mean[2] = {0.0, 0.0};
            std::size_t counts[2] = {0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                mean[assign[i]] += score_max(pool[order[i]]);
                ++counts[assign[i]];
            }
            for (int c = 0; c < 2; ++c) {
                if (counts[c] > 0) mean[c] /= static_cast<double>(counts[c]);
            }
            const int pos_cluster = mean[0] >= mean[1] ? 0 : 1;
            std::vector<std::size_t> pos_members, neg_members;
            for (std::size_t i = 0; i < n; ++i) {
                (assign[i] == pos_cluster ? pos_members : neg_members).push_back(i);
            }
            for (std::size_t j : sample_without_replacement(pos_members.size(), want_pos, rng)) {
                presumed[pos_members[j]] = PresumedLabel::Positive;
                in_training[pos_members[j]] = true;
            }
            for (std::size_t j : sample_without_replacement(neg_members.size(), want_neg, rng)) {
                presumed[neg_members[j]] = PresumedLabel::Negative;
                in_training[neg_members[j]] = true;
            }
            break;
        }
        case SelectionStrategy::Random: {
            const std::size_t take =
                std::min(take_count(config.p_fraction + config.n_fraction, n), n);
            for (std::size_t j : sample_without_replacement(n, take, rng)) {
                in_training[j] = true;
            }
            break;
        }
        case SelectionStrategy::Sampled: {
            std::vector<std::size_t> positives, negatives;
            for (std::size_t i = 0; i < n; ++i) {
                const Tuple& t = pool[order[i]];
                if (!t.truth) {
                    fail("TruthRequired",
                         "sampled selection needs truth on every tuple ('" + t.key() + "')");
                }
                (*t.truth >= 1 ? positives : negatives).push_back(i);
            }
            if (positives.size() < want_pos) {
                fail("NoPositivesAvailable",
                     "sampled selection needs " + std::to_string(want_pos) +
                         " true positives, pool has " + std::to_string(positives.size()));
            }
            if (negatives.size() < want_neg) {
                fail("NoNegativesAvailable",
                     "sampled selection needs " + std::to_string(want_neg) +
                         " true negatives, pool has " + std::to_string(negatives.size()));
            }
            for (std::size_t j : sample_without_replacement(positives.size(), want_pos, rng)) {
                presumed[positives[j]] = PresumedLabel::Positive;
                in_training[positives[j]] = true;
            }
            for (std::size_t j : sample_without_replacement(negatives.size(), want_neg, rng)) {
                presumed[negatives[j]] = PresumedLabel::Negative;
                in_training[negatives[j]] = true;
            }
            break;
        }
    }

    bool training_has_truth = true;
    std::size_t training_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Tuple& t = pool[order[i]];
        if (in_training[i]) {
            out.training.push_back({t, presumed[i]});
            if (t.truth) {
                if (*t.truth >= 1) ++training_positive;
            } else {
                training_has_truth = false;
            }
        } else {
            out.testing.push_back(t);
        }
    }
    if (training_has_truth && !out.training.empty()) {
        out.positive_ratio =
            static_cast<double>(training_positive) / static_cast<double>(out.training.size());
    }
    return out;
}

}  // namespace erdistill
