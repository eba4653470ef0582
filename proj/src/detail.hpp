#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rankq/qcompute.hpp"

namespace rankq::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// exp() of anything below this underflows to zero.
inline constexpr double kExpUnderflow = -745.0;

inline double safe_exp(double x) { return x > kExpUnderflow ? std::exp(x) : 0.0; }

// Log probability of a group of n pairs with k canonical ones, written as
// base + k * slope where slope = log(theta / (1 - theta)). Keeping slope at
// exactly zero for theta = 1/2 makes every block of such a group tie exactly.
struct GroupTerms {
    int n = 0;
    double theta = 0.5;
    double base = 0.0;
    double slope = 0.0;
    bool certain = false;  // theta == 1: only k == n has positive probability

    explicit GroupTerms(const Group& g) : n(g.size()), theta(g.theta) {
        if (theta >= 1.0) {
            certain = true;
        } else if (theta != 0.5) {
            const double log_other = std::log1p(-theta);
            base = n * log_other;
            slope = std::log(theta) - log_other;
        } else {
            base = n * std::log(0.5);
        }
    }

    double log_p(int k) const {
        if (certain) return k == n ? 0.0 : kNegInf;
        return base + k * slope;
    }

    // log of the binomial pmf C(n, k) theta^k (1 - theta)^(n - k).
    double log_pmf(int k) const { return log_choose(n, k) + log_p(k); }

    static double log_choose(int n, int k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    }
};

inline std::vector<GroupTerms> group_terms(const GroupedModel& grouped) {
    std::vector<GroupTerms> terms;
    terms.reserve(grouped.groups.size());
    for (const auto& g : grouped.groups) terms.emplace_back(g);
    return terms;
}

}  // namespace rankq::detail
