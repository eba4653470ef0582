#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

namespace rankq {

// Number of annotators that picked each confidence level (0 = not confident,
// 1 = somewhat confident, 2 = very confident).
struct ScoreCounts {
    int n0 = 0;
    int n1 = 0;
    int n2 = 0;

    int total() const noexcept { return n0 + n1 + n2; }
    bool operator==(const ScoreCounts&) const = default;
};

// Aggregated votes for one item pair. `n` counts every First/Second vote;
// `scores` tallies the votes that came with a confidence score. Votes without
// a score (first-round votes in a two-round protocol) make up n - scores.total().
struct PairCounts {
    std::string pair_id;
    int n = 0;
    int n_first = 0;
    std::optional<ScoreCounts> scores;

    bool operator==(const PairCounts&) const = default;
};

enum class Provenance {
    RatioMLE,
    ConfidenceMLE,
    // Read back from a targets file, which does not record the estimator.
    Imported,
    // Ground truth drawn by the simulator.
    Simulated,
};

const char* to_string(Provenance p) noexcept;

// Canonicalised Bernoulli parameter of one pair: `theta` is the probability a
// human picks the canonical first item and is always in [0.5, 1]. `flipped`
// records that the canonical first item is the original second item.
struct PairModel {
    std::string pair_id;
    double theta = 0.5;
    bool flipped = false;
    Provenance provenance = Provenance::RatioMLE;

    bool operator==(const PairModel&) const = default;
};

// An N-bit choice sequence in canonical orientation: true means the canonical
// first item was chosen.
struct RankingSequence {
    std::map<std::string, bool> choices;

    std::size_t size() const noexcept { return choices.size(); }
    bool operator==(const RankingSequence&) const = default;
};

}  // namespace rankq
