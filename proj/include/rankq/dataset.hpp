#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankq/types.hpp"

namespace rankq {

enum class Choice { First, Second, Undecided };

const char* to_string(Choice c) noexcept;

struct AnnotationRecord {
    std::string pair_id;
    std::string annotator_id;
    Choice choice = Choice::First;
    std::optional<int> confidence;  // 0, 1 or 2; never set for Undecided

    bool operator==(const AnnotationRecord&) const = default;
};

enum class SplitMode { Train, Test };

// A pair is discarded once it collects `discard_at` or more Undecided votes.
struct FilterPolicy {
    SplitMode mode = SplitMode::Train;
    int discard_at = 3;

    static FilterPolicy train() { return {SplitMode::Train, 3}; }
    static FilterPolicy test() { return {SplitMode::Test, 1}; }
};

struct FilterResult {
    std::vector<PairCounts> kept;
    std::vector<std::string> dropped;
};

inline constexpr const char* kAnnotationsHeader = "pair_id,annotator_id,choice,confidence";
inline constexpr const char* kPredictionsHeader = "pair_id,choice";
inline constexpr const char* kTargetsHeader = "pair_id,theta,flipped";

// Annotations CSV. An input with no lines at all yields an empty list; any
// other input must start with the header row.
std::vector<AnnotationRecord> parse_annotations(std::istream& source);
void write_annotations(std::span<const AnnotationRecord> records, std::ostream& sink);

// Aggregates votes per pair in order of first appearance. Undecided votes only
// count towards the discard rule. Pairs left with no First/Second vote are
// always dropped.
FilterResult filter_pairs(std::span<const AnnotationRecord> records, const FilterPolicy& policy);

bool detect_unanimous(const PairCounts& counts);

// Targets CSV (pair_id, theta with six decimals, flipped as 0/1). Returns the
// number of data rows written.
std::size_t export_targets(std::span<const PairModel> models, std::ostream& sink);
std::vector<PairModel> parse_targets(std::istream& source);

// Predictions reference items in their original orientation; the returned
// sequence is canonical (flipped pairs have their bit inverted).
RankingSequence parse_predictions(std::istream& source, std::span<const PairModel> models);
void write_predictions(const RankingSequence& sequence, std::span<const PairModel> models,
                       std::ostream& sink);

}  // namespace rankq
