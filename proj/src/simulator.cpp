#include "rankq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <random>
#include <string>

#include "rankq/error.hpp"
#include "rankq/rng.hpp"

namespace rankq {
namespace {

constexpr std::uint64_t kPopulationStream = 1;
constexpr std::uint64_t kAnnotationStream = 2;
constexpr std::uint64_t kMachineStream = 3;

std::array<double, 3> max_entropy_scores(double theta) {
    // Maximum entropy under a mean constraint gives q_s proportional to t^s.
    // The mean score m = 4 * (theta - 1/2) fixes t through
    //   (2 - m) t^2 + (1 - m) t - m = 0.
    const double m = 4.0 * (theta - 0.5);
    if (m <= 0.0) return {1.0, 0.0, 0.0};
    if (m >= 2.0) return {0.0, 0.0, 1.0};
    const double t = (-(1.0 - m) + std::sqrt((1.0 - m) * (1.0 - m) + 4.0 * m * (2.0 - m))) /
                     (2.0 * (2.0 - m));
    const double z = 1.0 + t + t * t;
    return {1.0 / z, t / z, t * t / z};
}

std::array<double, 3> polarized_scores(double theta) {
    return {2.0 - 2.0 * theta, 0.0, 2.0 * theta - 1.0};
}

std::array<double, 3> moderate_scores(double theta) {
    if (theta <= 0.75) return {3.0 - 4.0 * theta, 4.0 * theta - 2.0, 0.0};
    return {0.0, 4.0 - 4.0 * theta, 4.0 * theta - 3.0};
}

std::string pair_name(std::size_t i, std::size_t n) {
    const auto width = std::to_string(n == 0 ? 0 : n - 1).size();
    std::string digits = std::to_string(i);
    return "p" + std::string(width - digits.size(), '0') + digits;
}

int draw_score(SplitMixEngine& engine, const std::array<double, 3>& q) {
    const double u = unit_uniform(engine);
    if (u < q[0]) return 0;
    if (u < q[0] + q[1]) return 1;
    return 2;
}

void check(bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid population spec: ") + what);
}

struct ThetaSampler {
    SplitMixEngine& engine;

    double operator()(const UniformTheta& u) const {
        return u.a + (u.b - u.a) * unit_uniform(engine);
    }

    double operator()(const PointMixtureTheta& pm) const {
        double total = 0.0;
        for (const auto& [theta, w] : pm.points) total += w;
        double u = unit_uniform(engine) * total;
        for (const auto& [theta, w] : pm.points) {
            if (u < w) return theta;
            u -= w;
        }
        // Rounding fallthrough: the last point with positive weight.
        for (auto it = pm.points.rbegin(); it != pm.points.rend(); ++it) {
            if (it->second > 0.0) return it->first;
        }
        return pm.points.back().first;
    }

    double operator()(const BetaTheta& b) const {
        const double mu = 2.0 * (b.mean - 0.5);
        std::gamma_distribution<double> ga(mu * b.concentration, 1.0);
        std::gamma_distribution<double> gb((1.0 - mu) * b.concentration, 1.0);
        const double x = ga(engine);
        const double y = gb(engine);
        const double beta = x + y > 0.0 ? x / (x + y) : 0.5;
        return 0.5 + 0.5 * beta;
    }
};

}  // namespace

std::array<double, 3> score_probabilities(double theta, const ConfidenceModel& model) {
    if (!(theta >= 0.5 && theta <= 1.0)) throw Error("score model: theta outside [0.5, 1]");
    const double total = model.max_entropy + model.polarized + model.moderate;
    if (!(model.max_entropy >= 0.0 && model.polarized >= 0.0 && model.moderate >= 0.0) ||
        !(total > 0.0)) {
        throw Error("score model: weights must be non-negative with a positive sum");
    }
    std::array<double, 3> q{0.0, 0.0, 0.0};
    const auto add = [&](double w, const std::array<double, 3>& part) {
        if (w == 0.0) return;
        for (int s = 0; s < 3; ++s) q[s] += w / total * part[s];
    };
    add(model.max_entropy, max_entropy_scores(theta));
    add(model.polarized, polarized_scores(theta));
    add(model.moderate, moderate_scores(theta));
    return q;
}

void validate(const PopulationSpec& spec) {
    check(spec.annotators_per_pair >= 1, "annotators_per_pair must be at least 1");
    check(spec.second_round_annotators >= 0, "second_round_annotators must be non-negative");
    check(spec.flip_probability >= 0.0 && spec.flip_probability <= 1.0,
          "flip_probability must lie in [0, 1]");
    score_probabilities(0.75, spec.confidence_model);

    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, UniformTheta>) {
                check(d.a >= 0.5 && d.a <= d.b && d.b <= 1.0, "uniform needs 0.5 <= a <= b <= 1");
            } else if constexpr (std::is_same_v<T, PointMixtureTheta>) {
                check(!d.points.empty(), "point mixture needs at least one point");
                double total = 0.0;
                for (const auto& [theta, w] : d.points) {
                    check(theta >= 0.5 && theta <= 1.0, "mixture theta outside [0.5, 1]");
                    check(w >= 0.0, "mixture weight must be non-negative");
                    total += w;
                }
                check(total > 0.0, "mixture weights sum to zero");
            } else {
                check(d.mean > 0.5 && d.mean < 1.0, "beta mean must lie in (0.5, 1)");
                check(d.concentration > 0.0, "beta concentration must be positive");
            }
        },
        spec.theta_distribution);
}

std::vector<PairModel> sample_population(const PopulationSpec& spec) {
    validate(spec);
    std::vector<PairModel> truth;
    truth.reserve(spec.n_pairs);
    for (std::size_t i = 0; i < spec.n_pairs; ++i) {
        SplitMixEngine engine(derive_seed(spec.seed, kPopulationStream, i));
        PairModel m;
        m.pair_id = pair_name(i, spec.n_pairs);
        m.theta = std::clamp(std::visit(ThetaSampler{engine}, spec.theta_distribution), 0.5, 1.0);
        m.flipped = unit_uniform(engine) < spec.flip_probability;
        m.provenance = Provenance::Simulated;
        truth.push_back(std::move(m));
    }
    return truth;
}

std::vector<AnnotationRecord> sample_annotations(std::span<const PairModel> truth,
                                                 const PopulationSpec& spec) {
    validate(spec);
    std::vector<AnnotationRecord> records;
    const bool two_rounds = spec.second_round_annotators > 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const PairModel& pair = truth[i];
        SplitMixEngine engine(derive_seed(spec.seed, kAnnotationStream, i));
        const auto q = score_probabilities(std::clamp(pair.theta, 0.5, 1.0), spec.confidence_model);

        // Scores are drawn independently of the realised choice.
        auto vote = [&](const std::string& annotator, bool scored) {
            AnnotationRecord r;
            r.pair_id = pair.pair_id;
            r.annotator_id = annotator;
            const bool canonical_first = unit_uniform(engine) < pair.theta;
            r.choice = canonical_first != pair.flipped ? Choice::First : Choice::Second;
            if (scored) r.confidence = draw_score(engine, q);
            records.push_back(std::move(r));
        };

        int first_votes = 0;
        const std::size_t round_one_begin = records.size();
        for (int a = 0; a < spec.annotators_per_pair; ++a) {
            vote("r1a" + std::to_string(a), spec.scores && !two_rounds);
        }
        for (std::size_t r = round_one_begin; r < records.size(); ++r) {
            if (records[r].choice == Choice::First) ++first_votes;
        }
        const bool unanimous = first_votes == 0 || first_votes == spec.annotators_per_pair;
        if (two_rounds && unanimous) {
            for (int a = 0; a < spec.second_round_annotators; ++a) {
                vote("r2a" + std::to_string(a), true);
            }
        }
    }
    return records;
}

RankingSequence sample_machine_sequence(std::span<const PairModel> truth, const MachineSpec& machine,
                                        std::uint64_t seed) {
    if (!(machine.flip_rate >= 0.0 && machine.flip_rate <= 1.0)) {
        throw Error("flip rate must lie in [0, 1]");
    }
    RankingSequence seq;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        SplitMixEngine engine(derive_seed(seed, kMachineStream, i));
        bool bit = true;
        switch (machine.mode) {
            case MachineMode::Human: bit = unit_uniform(engine) < truth[i].theta; break;
            case MachineMode::Modal: bit = true; break;
            case MachineMode::Adversarial: bit = !(unit_uniform(engine) < machine.flip_rate); break;
        }
        seq.choices[truth[i].pair_id] = bit;
    }
    return seq;
}

}  // namespace rankq
