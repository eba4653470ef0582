#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "detail.hpp"
#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"

namespace rankq {

GroupedModel group_pairs(std::span<const PairModel> models, double quantization_step,
                         bool clamp_certain) {
    const bool valid_step = quantization_step == 0.0 ||
                            (quantization_step >= 1e-6 && quantization_step <= 0.25);
    if (!valid_step) throw Error("quantization step must be 0 or within [1e-6, 0.25]");

    std::map<double, std::size_t, std::greater<>> by_theta;
    std::vector<Group> groups;
    GroupedModel out;
    std::vector<std::pair<std::size_t, bool>> placement;
    placement.reserve(models.size());

    for (const auto& m : models) {
        if (!(m.theta >= 0.0 && m.theta <= 1.0)) {
            throw Error("pair '" + m.pair_id + "': theta outside [0, 1]");
        }
        const bool inverted = m.theta < 0.5;
        double theta = inverted ? 1.0 - m.theta : m.theta;
        if (quantization_step > 0.0) {
            theta = std::clamp(std::round(theta / quantization_step) * quantization_step, 0.5, 1.0);
        }
        if (clamp_certain && theta >= 1.0) theta = kCertainThetaCeiling;

        auto [it, inserted] = by_theta.try_emplace(theta, groups.size());
        if (inserted) groups.push_back(Group{theta, {}});
        groups[it->second].members.push_back(m.pair_id);
        placement.emplace_back(it->second, inverted);
    }

    // Re-number groups in decreasing theta order.
    std::vector<std::size_t> rank(groups.size());
    std::size_t next = 0;
    for (const auto& [theta, idx] : by_theta) rank[idx] = next++;
    out.groups.resize(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) out.groups[rank[i]] = std::move(groups[i]);

    out.total_pairs = models.size();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto [idx, inverted] = placement[i];
        if (!out.index.emplace(models[i].pair_id, GroupedModel::Member{rank[idx], inverted}).second) {
            throw DuplicatePairError("duplicate pair id '" + models[i].pair_id + "'");
        }
    }
    return out;
}

std::vector<int> count_ones(const GroupedModel& grouped, const RankingSequence& x) {
    std::vector<int> k(grouped.groups.size(), 0);
    for (const auto& [id, bit] : x.choices) {
        const auto it = grouped.index.find(id);
        if (it == grouped.index.end()) {
            throw CoverageError("sequence has pair '" + id + "' which is not in the model");
        }
        if (bit != it->second.inverted) ++k[it->second.group];
    }
    if (x.size() != grouped.total_pairs) {
        throw CoverageError("sequence covers " + std::to_string(x.size()) + " of " +
                            std::to_string(grouped.total_pairs) + " pairs");
    }
    return k;
}

double block_log_prob(const GroupedModel& grouped, std::span<const int> k) {
    if (k.size() != grouped.groups.size()) throw Error("ones-count vector has wrong length");
    double sum = 0.0;
    for (std::size_t g = 0; g < k.size(); ++g) {
        const detail::GroupTerms t(grouped.groups[g]);
        if (k[g] < 0 || k[g] > t.n) throw Error("ones-count outside [0, n_g]");
        sum += t.log_p(k[g]);
    }
    return sum;
}

double log_prob(const GroupedModel& grouped, const RankingSequence& x) {
    const auto k = count_ones(grouped, x);
    return block_log_prob(grouped, k);
}

double tie_tolerance(double target_log_p) noexcept {
    return 1e-10 * std::max(1.0, std::abs(target_log_p));
}

std::uint64_t block_count(const GroupedModel& grouped) noexcept {
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t j = 1;
    for (const auto& g : grouped.groups) {
        const auto radix = static_cast<std::uint64_t>(g.size()) + 1;
        if (j > max / radix) return max;
        j *= radix;
    }
    return j;
}

}  // namespace rankq
