#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "rankq/dataset.hpp"
#include "rankq/types.hpp"

namespace rankq {

struct UniformTheta {
    double a = 0.5;
    double b = 1.0;
};

// Discrete thetas with (unnormalised) weights.
struct PointMixtureTheta {
    std::vector<std::pair<double, double>> points;
};

// theta = 1/2 + B/2 with B ~ Beta, parameterised by the mean of theta and
// the concentration alpha + beta.
struct BetaTheta {
    double mean = 0.75;
    double concentration = 4.0;
};

using ThetaDistribution = std::variant<UniformTheta, PointMixtureTheta, BetaTheta>;

// Mixture of three score distributions, each consistent with
// q0/2 + 3*q1/4 + q2 = theta:
//   max_entropy  the maximum-entropy (q0, q1, q2)
//   polarized    no "somewhat confident" answers (q1 = 0)
//   moderate     as much mass on "somewhat confident" as the constraint allows
// Weights are normalised by their sum.
struct ConfidenceModel {
    double max_entropy = 1.0;
    double polarized = 0.0;
    double moderate = 0.0;
};

std::array<double, 3> score_probabilities(double theta, const ConfidenceModel& model);

struct PopulationSpec {
    std::size_t n_pairs = 0;
    ThetaDistribution theta_distribution = UniformTheta{};
    ConfidenceModel confidence_model{};
    int annotators_per_pair = 5;
    // When positive, pairs unanimous after the first round receive this many
    // further scored votes and first-round votes carry no score.
    int second_round_annotators = 0;
    // Attach confidence scores to single-round votes.
    bool scores = true;
    // Probability that a pair is presented with its canonical items swapped.
    double flip_probability = 0.5;
    std::uint64_t seed = 0;
};

// Throws rankq::Error for invalid parameters.
void validate(const PopulationSpec& spec);

std::vector<PairModel> sample_population(const PopulationSpec& spec);

std::vector<AnnotationRecord> sample_annotations(std::span<const PairModel> truth,
                                                 const PopulationSpec& spec);

enum class MachineMode { Human, Modal, Adversarial };

struct MachineSpec {
    MachineMode mode = MachineMode::Human;
    double flip_rate = 0.0;  // Adversarial only
};

RankingSequence sample_machine_sequence(std::span<const PairModel> truth, const MachineSpec& machine,
                                        std::uint64_t seed);

}  // namespace rankq
