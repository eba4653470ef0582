#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"

// Q as a tail probability. Writing log p(Y) = log p_max - D(Y), where the
// deficit D(Y) = sum_g (n_g - k_g) * slope_g is a sum of independent
// per-group terms with binomially distributed k_g, gives
//   Q = Pr[D(Y) <= D(x)].
// The distribution of D is built group by group. Each live entry is an
// interval [lo, hi] holding the mass of all partial sums that fell into it;
// entries are merged while their span stays within the bin width, so every
// entry is within one bin width of the exact values it represents.

namespace rankq {
namespace {

struct Entry {
    double lo;
    double hi;
    double mass;
};

// Greedy left-to-right merge of entries sorted by lo.
void merge_sorted(std::vector<Entry>& entries, double width) {
    if (entries.empty()) return;
    std::size_t out = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        Entry& cur = entries[out];
        const Entry& e = entries[i];
        if (std::max(cur.hi, e.hi) - cur.lo <= width) {
            cur.hi = std::max(cur.hi, e.hi);
            cur.mass += e.mass;
        } else {
            entries[++out] = e;
        }
    }
    entries.resize(out + 1);
}

}  // namespace

QResult q_dp(const GroupedModel& grouped, const RankingSequence& x, double bin_width,
             const DpOptions& options) {
    if (!(bin_width > 0.0)) throw Error("DP bin width must be positive");
    if (options.max_entries < 2) throw Error("DP entry budget must be at least 2");

    const auto k_x = count_ones(grouped, x);
    const auto terms = detail::group_terms(grouped);

    QResult result;
    result.method = QMethod::DP;
    result.target_log_p = block_log_prob(grouped, k_x);
    result.error_bound = 0.0;
    result.effective_bin_width = bin_width;
    if (result.target_log_p == detail::kNegInf) {
        result.q = 1.0;
        result.tie_mass = 0.0;
        return result;
    }
    const double tol = tie_tolerance(result.target_log_p);

    // Groups with theta = 1/2 or theta = 1 (and the target on the certain
    // side) have a single deficit value of zero; only the rest take part.
    struct Active {
        const detail::GroupTerms* terms;
        int k_x;
    };
    std::vector<Active> active;
    double target_deficit = 0.0;
    double target_block_log_mass = 0.0;
    for (std::size_t g = 0; g < terms.size(); ++g) {
        if (terms[g].certain || terms[g].slope == 0.0) continue;
        active.push_back({&terms[g], k_x[g]});
        target_deficit += (terms[g].n - k_x[g]) * terms[g].slope;
        target_block_log_mass += terms[g].log_pmf(k_x[g]);
    }
    if (active.empty()) {
        result.q = 1.0;
        result.tie_mass = 1.0;
        return result;
    }

    // Atoms lighter than this are skipped; their total is bounded by 1e-12
    // of the target's own block mass and is added to the error bound.
    std::size_t atom_count = 0;
    for (const auto& a : active) atom_count += static_cast<std::size_t>(a.terms->n) + 1;
    const double atom_floor =
        std::min(1e-20, 1e-12 * detail::safe_exp(target_block_log_mass) / atom_count);

    // rest_max[i]: largest deficit groups i.. can still add.
    std::vector<double> rest_max(active.size() + 1, 0.0);
    for (std::size_t i = active.size(); i-- > 0;) {
        rest_max[i] = rest_max[i + 1] + active[i].terms->n * active[i].terms->slope;
    }

    const double include_limit = target_deficit + tol;
    const double sure_limit = target_deficit - tol;
    double width = bin_width;
    double sure_mass = 0.0;
    double skipped_mass = 0.0;
    std::vector<Entry> entries{{0.0, 0.0, 1.0}};
    std::vector<Entry> next;

    for (std::size_t i = 0; i < active.size(); ++i) {
        const auto& t = *active[i].terms;
        std::vector<std::pair<double, double>> atoms;  // (deficit, pmf)
        for (int k = t.n; k >= 0; --k) {
            const double pmf = detail::safe_exp(t.log_pmf(k));
            if (pmf < atom_floor) {
                skipped_mass += pmf;
                continue;
            }
            atoms.emplace_back((t.n - k) * t.slope, pmf);
        }

        next.clear();
        next.reserve(entries.size() * atoms.size());
        for (const auto& e : entries) {
            for (const auto& [deficit, pmf] : atoms) {
                // Deficits only grow: anything past the limit stays excluded.
                if (e.lo + deficit > include_limit) break;
                next.push_back({e.lo + deficit, e.hi + deficit, e.mass * pmf});
            }
        }
        std::sort(next.begin(), next.end(), [](const Entry& a, const Entry& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.hi < b.hi;
        });
        merge_sorted(next, std::max(width, tol));

        // Entries that stay strictly more probable than the target whatever
        // the remaining groups contribute are settled now.
        std::size_t out = 0;
        for (const auto& e : next) {
            if (e.hi + rest_max[i + 1] < sure_limit) {
                sure_mass += e.mass;
            } else {
                next[out++] = e;
            }
        }
        next.resize(out);

        while (next.size() > options.max_entries) {
            width *= 2.0;
            merge_sorted(next, std::max(width, tol));
        }
        entries.swap(next);
    }

    double straddle = 0.0;
    double tie = 0.0;
    for (const auto& e : entries) {
        if (e.hi <= include_limit) {
            sure_mass += e.mass;
        } else {
            // Straddles the threshold; counted, and reported as uncertain.
            straddle += e.mass;
        }
        if (e.hi >= sure_limit && e.lo <= include_limit) tie += e.mass;
    }

    result.q = std::min(1.0, sure_mass + straddle);
    result.tie_mass = tie;
    result.error_bound = straddle + skipped_mass;
    result.effective_bin_width = width;
    return result;
}

}  // namespace rankq
