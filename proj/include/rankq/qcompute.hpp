#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankq/types.hpp"

namespace rankq {

// ---------------------------------------------------------------------------
// Grouped model
// ---------------------------------------------------------------------------

struct Group {
    double theta = 0.5;  // in [0.5, 1]
    std::vector<std::string> members;

    int size() const noexcept { return static_cast<int>(members.size()); }
};

// Pairs partitioned by (quantised) theta. Groups are ordered by decreasing
// theta. A pair whose input theta was below 0.5 is stored canonicalised and
// marked `inverted`; its sequence bit is read inverted.
struct GroupedModel {
    struct Member {
        std::size_t group = 0;
        bool inverted = false;
    };

    std::vector<Group> groups;
    std::size_t total_pairs = 0;
    std::unordered_map<std::string, Member> index;
};

inline constexpr double kCertainThetaCeiling = 1.0 - 1e-12;

// quantization_step must be 0 (exact grouping) or in [1e-6, 0.25]. With
// clamp_certain, thetas of exactly 1 become kCertainThetaCeiling.
GroupedModel group_pairs(std::span<const PairModel> models, double quantization_step = 0.0,
                         bool clamp_certain = false);

// Number of canonical 1s per group. Throws CoverageError unless the sequence
// covers exactly the model's pairs.
std::vector<int> count_ones(const GroupedModel& grouped, const RankingSequence& x);

// log p(x) = sum_i x_i log(theta_i) + (1 - x_i) log(1 - theta_i). A choice
// against a theta = 1 pair gives -infinity.
double log_prob(const GroupedModel& grouped, const RankingSequence& x);

// Per-sequence log probability of the block with ones-counts k.
double block_log_prob(const GroupedModel& grouped, std::span<const int> k);

// Two log probabilities closer than this are treated as a tie. Sums of
// O(N) logarithms carry rounding error far below this.
double tie_tolerance(double target_log_p) noexcept;

// ---------------------------------------------------------------------------
// Percentile value Q
// ---------------------------------------------------------------------------

enum class QMethod { Exact, DP, BruteForce, MonteCarlo };

const char* to_string(QMethod m) noexcept;

struct QResult {
    double q = 1.0;
    double target_log_p = 0.0;
    // Mass of all sequences tying the target. DP and Monte Carlo report an
    // estimate (DP: mass of bins overlapping the tie band).
    double tie_mass = 0.0;
    QMethod method = QMethod::Exact;
    std::optional<double> mc_stderr;
    // DP only: |q - exact q| <= error_bound.
    std::optional<double> error_bound;
    // DP only: bin width after any coarsening forced by the entry budget.
    std::optional<double> effective_bin_width;
};

// Saturating product of (n_g + 1) over groups.
std::uint64_t block_count(const GroupedModel& grouped) noexcept;

// All assignments of ones-counts to groups, sorted by per-sequence log
// probability (descending, ties by assignment index).
class BlockTable {
public:
    struct Block {
        double log_p;
        double log_m;  // log of the multiplicity prod_g C(n_g, k_g)
        std::uint64_t index;
    };

    BlockTable() = default;
    BlockTable(std::vector<int> radices, std::vector<Block> blocks);

    std::span<const Block> blocks() const noexcept { return blocks_; }
    std::size_t size() const noexcept { return blocks_.size(); }

    // Ones-count per group for the j-th block in sorted order.
    std::vector<int> k_vector(std::size_t j) const;

    // Sum of block masses, accumulated in sorted order.
    double total_mass() const;

private:
    std::vector<int> radices_;
    std::vector<Block> blocks_;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
inline constexpr double kDefaultDpBinWidth = 1e-6;

// Throws CapacityError when block_count(grouped) > cap.
BlockTable enumerate_blocks(const GroupedModel& grouped,
                            std::uint64_t cap = kDefaultEnumerationCap);

// Sum of block masses with P_j >= P_{j_X}, ties included.
QResult q_exact(const BlockTable& table, const GroupedModel& grouped, const RankingSequence& x);

inline constexpr std::size_t kBruteForceMaxPairs = 20;

// Definitional oracle: enumerates and sorts all 2^N sequences. Thetas are
// used as given (no canonicalisation or quantisation).
QResult q_bruteforce(std::span<const PairModel> models, const RankingSequence& x);

struct DpOptions {
    // Once the number of live bins exceeds this, the bin width is doubled.
    std::size_t max_entries = std::size_t{1} << 16;
};

// Tail probability Pr[log p(Y) >= log p(x)] for Y drawn from the model,
// by convolving per-group binomial deficit distributions.
QResult q_dp(const GroupedModel& grouped, const RankingSequence& x,
             double bin_width = kDefaultDpBinWidth, const DpOptions& options = {});

// Fraction of `samples` model draws at least as probable as x. threads = 0
// uses the hardware concurrency; the estimate does not depend on it.
QResult q_montecarlo(const GroupedModel& grouped, const RankingSequence& x, std::size_t samples,
                     std::uint64_t seed, unsigned threads = 0);

struct QConfig {
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
    double dp_bin_width = kDefaultDpBinWidth;
};

// Exact enumeration when the block count fits the cap, DP otherwise.
QResult compute_q(const GroupedModel& grouped, const RankingSequence& x, const QConfig& config = {});

// ---------------------------------------------------------------------------
// Decision
// ---------------------------------------------------------------------------

enum class Decision { Indistinguishable, Distinguishable };

const char* to_string(Decision d) noexcept;

// Indistinguishable iff q <= 1 - epsilon. epsilon must lie in (0, 1).
Decision decide(double q, double epsilon);

}  // namespace rankq
