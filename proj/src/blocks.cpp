#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"

namespace rankq {

const char* to_string(QMethod m) noexcept {
    switch (m) {
        case QMethod::Exact: return "Exact";
        case QMethod::DP: return "DP";
        case QMethod::BruteForce: return "BruteForce";
        case QMethod::MonteCarlo: return "MonteCarlo";
    }
    return "?";
}

BlockTable::BlockTable(std::vector<int> radices, std::vector<Block> blocks)
    : radices_(std::move(radices)), blocks_(std::move(blocks)) {}

std::vector<int> BlockTable::k_vector(std::size_t j) const {
    std::uint64_t index = blocks_.at(j).index;
    std::vector<int> k(radices_.size());
    for (std::size_t g = 0; g < radices_.size(); ++g) {
        const auto radix = static_cast<std::uint64_t>(radices_[g]);
        k[g] = static_cast<int>(index % radix);
        index /= radix;
    }
    return k;
}

double BlockTable::total_mass() const {
    double sum = 0.0;
    for (const auto& b : blocks_) sum += detail::safe_exp(b.log_m + b.log_p);
    return sum;
}

BlockTable enumerate_blocks(const GroupedModel& grouped, std::uint64_t cap) {
    const std::uint64_t total = block_count(grouped);
    if (total > cap) {
        throw CapacityError("model has " + std::to_string(total) + " blocks, above the cap of " +
                            std::to_string(cap) + "; use the DP evaluator");
    }

    const auto terms = detail::group_terms(grouped);
    const std::size_t G = terms.size();
    std::vector<int> radices(G);
    std::vector<std::vector<double>> log_p(G), log_m(G);
    for (std::size_t g = 0; g < G; ++g) {
        radices[g] = terms[g].n + 1;
        for (int k = 0; k <= terms[g].n; ++k) {
            log_p[g].push_back(terms[g].log_p(k));
            log_m[g].push_back(detail::GroupTerms::log_choose(terms[g].n, k));
        }
    }

    std::vector<BlockTable::Block> blocks(total);
    std::vector<int> k(G, 0);
    for (std::uint64_t j = 0; j < total; ++j) {
        double lp = 0.0;
        double lm = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            lp += log_p[g][k[g]];
            lm += log_m[g][k[g]];
        }
        blocks[j] = {lp, lm, j};
        // Mixed-radix increment, group 0 least significant.
        for (std::size_t g = 0; g < G; ++g) {
            if (++k[g] < radices[g]) break;
            k[g] = 0;
        }
    }

    std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
        if (a.log_p != b.log_p) return a.log_p > b.log_p;
        return a.index < b.index;
    });
    return BlockTable(std::move(radices), std::move(blocks));
}

QResult q_exact(const BlockTable& table, const GroupedModel& grouped, const RankingSequence& x) {
    const auto k = count_ones(grouped, x);
    QResult result;
    result.method = QMethod::Exact;
    result.target_log_p = block_log_prob(grouped, k);

    // A zero-probability target ranks below every sequence.
    if (result.target_log_p == detail::kNegInf) {
        result.q = 1.0;
        result.tie_mass = 0.0;
        return result;
    }

    const double tol = tie_tolerance(result.target_log_p);
    const double lower = result.target_log_p - tol;
    const double upper = result.target_log_p + tol;
    double mass = 0.0;
    double tie = 0.0;
    for (const auto& b : table.blocks()) {
        if (b.log_p < lower) break;
        const double m = detail::safe_exp(b.log_m + b.log_p);
        mass += m;
        if (b.log_p <= upper) tie += m;
    }
    result.q = std::min(1.0, mass);
    result.tie_mass = tie;
    return result;
}

QResult q_bruteforce(std::span<const PairModel> models, const RankingSequence& x) {
    const std::size_t N = models.size();
    if (N > kBruteForceMaxPairs) {
        throw CapacityError("brute force is limited to " + std::to_string(kBruteForceMaxPairs) +
                            " pairs, got " + std::to_string(N));
    }
    if (x.size() != N) {
        throw CoverageError("sequence covers " + std::to_string(x.size()) + " of " +
                            std::to_string(N) + " pairs");
    }

    std::vector<double> log_one(N), log_zero(N);
    QResult result;
    result.method = QMethod::BruteForce;
    result.target_log_p = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double theta = models[i].theta;
        log_one[i] = std::log(theta);
        log_zero[i] = std::log1p(-theta);
        const auto it = x.choices.find(models[i].pair_id);
        if (it == x.choices.end()) {
            throw CoverageError("sequence has no choice for pair '" + models[i].pair_id + "'");
        }
        result.target_log_p += it->second ? log_one[i] : log_zero[i];
    }

    const std::size_t total = std::size_t{1} << N;
    std::vector<double> log_p(total);
    for (std::size_t mask = 0; mask < total; ++mask) {
        double lp = 0.0;
        for (std::size_t i = 0; i < N; ++i) lp += (mask >> i) & 1U ? log_one[i] : log_zero[i];
        log_p[mask] = lp;
    }
    std::sort(log_p.begin(), log_p.end(), std::greater<>());

    if (result.target_log_p == detail::kNegInf) {
        result.q = 1.0;
        result.tie_mass = 0.0;
        return result;
    }
    const double tol = tie_tolerance(result.target_log_p);
    double mass = 0.0;
    double tie = 0.0;
    for (double lp : log_p) {
        if (lp < result.target_log_p - tol) break;
        const double p = detail::safe_exp(lp);
        mass += p;
        if (lp <= result.target_log_p + tol) tie += p;
    }
    result.q = std::min(1.0, mass);
    result.tie_mass = tie;
    return result;
}

}  // namespace rankq
