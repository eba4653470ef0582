#pragma once

#include <span>
#include <vector>

#include "rankq/types.hpp"

namespace rankq {

// Maximiser of theta^n * q0^n0 * q1^n1 * q2^n2 subject to the simplex
// constraint on (q0, q1, q2) and q0/2 + 3*q1/4 + q2 = theta.
struct ConfidenceMLESolution {
    double theta = 0.5;
    double q0 = 1.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double log_likelihood = 0.0;
};

struct ConfidenceOptions {
    // Golden-section refinement stops once the theta bracket is this narrow.
    double tol = 1e-8;
    // Spacing of the global theta grid that seeds the refinement.
    double grid_step = 1e-3;
    // Count unscored votes as extra theta factors in the likelihood. When
    // false only the scored votes enter.
    bool include_unscored_votes = false;
};

enum class EstimatorPolicy {
    // Confidence-score MLE for unanimous pairs that carry scores, ratio MLE otherwise.
    ConfidenceWhenUnanimous,
    RatioOnly,
};

struct EstimationConfig {
    EstimatorPolicy policy = EstimatorPolicy::ConfidenceWhenUnanimous;
    ConfidenceOptions confidence{};
};

// theta = n_first / n, canonicalised so theta >= 0.5. A raw estimate of
// exactly 0.5 keeps the original orientation.
PairModel estimate_ratio(const PairCounts& counts);

// Confidence-score MLE for a unanimous pair. Either orientation of unanimity
// is accepted; the returned theta refers to the side everyone picked.
ConfidenceMLESolution estimate_confidence(const PairCounts& counts,
                                          const ConfidenceOptions& options = {});

// Log of theta^n_theta * q0^n0 * q1^n1 * q2^n2 after eliminating q0 and q1.
// Terms with a zero count are dropped; returns -inf outside the feasible
// polygon or where a counted level has zero probability.
double confidence_log_likelihood(double theta, double q2, int n_theta, const ScoreCounts& scores);

std::vector<PairModel> build_pair_models(std::span<const PairCounts> all_counts,
                                         const EstimationConfig& config = {});

}  // namespace rankq
