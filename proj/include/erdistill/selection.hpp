#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erdistill/core.hpp"

namespace erdistill {

enum class SelectionStrategy {
    Random,
    RankMax,
    RankTop2,
    ClusterKmeans,
    ClusterAgglomerative,
    Sampled,
};

std::string to_string(SelectionStrategy s);
SelectionStrategy selection_strategy_from_string(std::string_view s);

struct SelectionConfig {
    SelectionStrategy strategy = SelectionStrategy::RankMax;
    double p_fraction = 0.075;
    double n_fraction = 0.025;
    int bins = 10;
    std::uint64_t seed = 0;
};

/// Throws ConfigError unless 0 < p+n <= 1 and bins >= 2.
void validate_config(const SelectionConfig& config);

enum class PresumedLabel { Unset, Positive, Negative };

std::string to_string(PresumedLabel label);

struct SelectedTuple {
    Tuple tuple;
    PresumedLabel presumed = PresumedLabel::Unset;
};

/// Disjoint training/testing split of the input pool. positive_ratio of the
/// training set is filled in when every training tuple carries truth.
struct SelectionOutcome {
    std::vector<SelectedTuple> training;
    std::vector<Tuple> testing;
    std::optional<double> positive_ratio;
    std::vector<std::string> warnings;
};

/// Highest candidate score of the tuple.
double score_max(const Tuple& t);

/// Mean of the two highest candidate scores; the single score for a
/// one-candidate tuple.
double score_top2(const Tuple& t);

/// Histogram of candidate scores over `bins` equal-width bins on [0,1];
/// bin i covers [i/b, (i+1)/b) with the last bin closed at 1.0. Bin edges are
/// decimal-faithful: a score written as 0.7 lands in [0.7, 0.8).
std::vector<int> histogram_vector(const Tuple& t, int bins);

/// Fraction of tuples whose truth is a positive index. TruthRequired unless
/// every tuple carries truth.
double positive_ratio(const std::vector<Tuple>& tuples);

/// Splits the pool into training and testing without ground truth (except
/// the truth-aware `sampled` baseline). Deterministic for a fixed pool and
/// config; the pool is processed in query-id order, so the outcome is also
/// independent of input permutation.
SelectionOutcome select(const std::vector<Tuple>& pool, const SelectionConfig& config);

}  // namespace erdistill
