#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"

namespace rankq {

const char* to_string(Decision d) noexcept {
    return d == Decision::Distinguishable ? "Distinguishable" : "Indistinguishable";
}

Decision decide(double q, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must lie in (0, 1)");
    return q <= 1.0 - epsilon ? Decision::Indistinguishable : Decision::Distinguishable;
}

QResult compute_q(const GroupedModel& grouped, const RankingSequence& x, const QConfig& config) {
    if (block_count(grouped) <= config.enumeration_cap) {
        const auto table = enumerate_blocks(grouped, config.enumeration_cap);
        return q_exact(table, grouped, x);
    }
    return q_dp(grouped, x, config.dp_bin_width);
}

}  // namespace rankq
