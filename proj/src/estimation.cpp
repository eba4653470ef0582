#include "rankq/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "rankq/dataset.hpp"
#include "rankq/error.hpp"

namespace rankq {

const char* to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::RatioMLE: return "RatioMLE";
        case Provenance::ConfidenceMLE: return "ConfidenceMLE";
        case Provenance::Imported: return "Imported";
        case Provenance::Simulated: return "Simulated";
    }
    return "?";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// count * log(p) with the 0 * log(0) = 0 convention.
double weighted_log(int count, double p) {
    if (count == 0) return 0.0;
    if (p <= 0.0) return kNegInf;
    return count * std::log(p);
}

// Feasible q2 range for a given theta: q1 >= 0 gives q2 <= 2*theta - 1,
// q0 >= 0 gives q2 >= 4*theta - 3. The other bounds are implied on [1/2, 1].
struct Q2Range {
    double lo;
    double hi;
};

Q2Range q2_range(double theta) {
    const double lo = std::max(0.0, 4.0 * theta - 3.0);
    const double hi = std::max(lo, 2.0 * theta - 1.0);
    return {lo, hi};
}

// Score part of the reduced objective, maximised over q2 for fixed theta.
// The objective is concave in q2, so the maximum is at a stationary point or
// an end of the feasible interval. Stationary points solve
//   2*S*q^2 - B*q - n2*a*b = 0,  a = 3 - 4*theta, b = 4*theta - 2.
struct ProfilePoint {
    double q2;
    double value;
};

ProfilePoint profile_scores(double theta, const ScoreCounts& s) {
    const auto [lo, hi] = q2_range(theta);
    const double a = 3.0 - 4.0 * theta;
    const double b = 4.0 * theta - 2.0;

    std::array<double, 4> candidates{lo, hi, lo, lo};
    std::size_t count = 2;
    const double S = s.total();
    const double B = s.n0 * b - 2.0 * s.n1 * a + s.n2 * (b - 2.0 * a);
    const double C = -s.n2 * a * b;
    const double disc = B * B - 8.0 * S * C;
    if (S > 0 && disc >= 0) {
        const double root = std::sqrt(disc);
        for (double q : {(B + root) / (4.0 * S), (B - root) / (4.0 * S)}) {
            if (q > lo && q < hi) candidates[count++] = q;
        }
    }

    ProfilePoint best{lo, kNegInf};
    for (std::size_t i = 0; i < count; ++i) {
        const double q2 = candidates[i];
        const double value = confidence_log_likelihood(theta, q2, 0, s);
        if (value > best.value) best = {q2, value};
    }
    return best;
}

}  // namespace

double confidence_log_likelihood(double theta, double q2, int n_theta, const ScoreCounts& s) {
    if (theta < 0.5 || theta > 1.0) return kNegInf;
    const auto [lo, hi] = q2_range(theta);
    // Allow rounding-level excursions at the polygon edges.
    constexpr double slack = 1e-14;
    if (q2 < lo - slack || q2 > hi + slack) return kNegInf;
    const double q0 = std::max(0.0, 3.0 - 4.0 * theta + q2);
    const double q1 = std::max(0.0, 4.0 * theta - 2.0 - 2.0 * q2);
    const double q2c = std::max(0.0, q2);
    return weighted_log(n_theta, theta) + weighted_log(s.n0, q0) + weighted_log(s.n1, q1) +
           weighted_log(s.n2, q2c);
}

PairModel estimate_ratio(const PairCounts& counts) {
    if (counts.n <= 0) throw EmptyPairError("pair '" + counts.pair_id + "' has no votes");
    if (counts.n_first < 0 || counts.n_first > counts.n) {
        throw EstimationError("pair '" + counts.pair_id + "': n_first outside [0, n]");
    }
    PairModel model;
    model.pair_id = counts.pair_id;
    model.provenance = Provenance::RatioMLE;
    // 2 * n_first < n  <=>  n_first / n < 0.5, without rounding.
    if (2 * counts.n_first < counts.n) {
        model.theta = static_cast<double>(counts.n - counts.n_first) / counts.n;
        model.flipped = true;
    } else {
        model.theta = static_cast<double>(counts.n_first) / counts.n;
        model.flipped = false;
    }
    return model;
}

ConfidenceMLESolution estimate_confidence(const PairCounts& counts, const ConfidenceOptions& options) {
    if (!counts.scores) {
        throw MissingScoresError("pair '" + counts.pair_id + "' has no confidence scores");
    }
    if (counts.n <= 0) throw EmptyPairError("pair '" + counts.pair_id + "' has no votes");
    if (!detect_unanimous(counts)) {
        throw WrongEstimatorError("pair '" + counts.pair_id +
                                  "' is not unanimous; use the ratio estimate");
    }
    const ScoreCounts& s = *counts.scores;
    if (s.n0 < 0 || s.n1 < 0 || s.n2 < 0 || s.total() > counts.n) {
        throw EstimationError("pair '" + counts.pair_id + "': inconsistent score counts");
    }
    if (s.total() == 0) {
        throw MissingScoresError("pair '" + counts.pair_id + "' has no scored votes");
    }
    if (!(options.tol > 0.0) || !(options.grid_step > 0.0) || options.grid_step > 0.5) {
        throw EstimationError("confidence MLE: tol and grid_step must be positive");
    }

    const int n_theta = options.include_unscored_votes ? counts.n : s.total();
    auto objective = [&](double theta) {
        return weighted_log(n_theta, theta) + profile_scores(theta, s).value;
    };

    // The reduced objective is concave (a sum of logs of affine functions
    // over a convex polygon), and so is its profile in theta. A coarse grid
    // brackets the maximum; golden-section search narrows the bracket.
    const int steps = static_cast<int>(std::ceil(0.5 / options.grid_step));
    const double h = 0.5 / steps;
    int best_i = 0;
    double best_value = kNegInf;
    for (int i = 0; i <= steps; ++i) {
        const double value = objective(0.5 + i * h);
        if (value > best_value) {
            best_value = value;
            best_i = i;
        }
    }

    double lo = 0.5 + std::max(0, best_i - 1) * h;
    double hi = std::min(1.0, 0.5 + std::min(steps, best_i + 1) * h);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int iter = 0; iter < 200 && hi - lo > options.tol; ++iter) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
    }

    double theta = f1 >= f2 ? x1 : x2;
    double value = std::max(f1, f2);
    // The profile has kinks at the polygon vertices theta = 1/2, 3/4, 1,
    // where the maximum often sits (e.g. all scores equal); prefer an exact
    // vertex when it is at least as good as the refined point.
    for (double edge : {0.5, 0.75, 1.0}) {
        const double v = objective(edge);
        if (v >= value) {
            theta = edge;
            value = v;
        }
    }

    const ProfilePoint inner = profile_scores(theta, s);
    ConfidenceMLESolution sol;
    sol.theta = theta;
    sol.q2 = std::clamp(inner.q2, 0.0, 1.0);
    sol.q1 = std::clamp(4.0 * theta - 2.0 - 2.0 * inner.q2, 0.0, 1.0);
    sol.q0 = std::clamp(3.0 - 4.0 * theta + inner.q2, 0.0, 1.0);
    sol.log_likelihood = value;
    return sol;
}

std::vector<PairModel> build_pair_models(std::span<const PairCounts> all_counts,
                                         const EstimationConfig& config) {
    std::unordered_set<std::string> seen;
    for (const auto& c : all_counts) {
        if (!seen.insert(c.pair_id).second) {
            throw DuplicatePairError("duplicate pair id '" + c.pair_id + "'");
        }
    }

    std::vector<PairModel> models;
    models.reserve(all_counts.size());
    for (const auto& c : all_counts) {
        const bool use_confidence = config.policy == EstimatorPolicy::ConfidenceWhenUnanimous &&
                                    c.n > 0 && detect_unanimous(c) && c.scores &&
                                    c.scores->total() > 0;
        if (!use_confidence) {
            models.push_back(estimate_ratio(c));
            continue;
        }
        const auto sol = estimate_confidence(c, config.confidence);
        PairModel m;
        m.pair_id = c.pair_id;
        m.theta = sol.theta;
        m.flipped = c.n_first == 0;
        m.provenance = Provenance::ConfidenceMLE;
        models.push_back(std::move(m));
    }
    return models;
}

}  // namespace rankq
