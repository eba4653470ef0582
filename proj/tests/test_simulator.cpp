#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rankq/error.hpp"
#include "rankq/estimation.hpp"
#include "rankq/simulator.hpp"

using namespace rankq;

namespace {

PopulationSpec point_spec(double theta, std::size_t n, int annotators) {
    PopulationSpec s;
    s.n_pairs = n;
    s.theta_distribution = PointMixtureTheta{{{theta, 1.0}}};
    s.annotators_per_pair = annotators;
    s.seed = 5;
    return s;
}

double ratio_mae(int annotators) {
    PopulationSpec s;
    s.n_pairs = 500;
    s.theta_distribution = UniformTheta{0.5, 1.0};
    s.annotators_per_pair = annotators;
    s.seed = 77;
    const auto truth = sample_population(s);
    const auto counts = filter_pairs(sample_annotations(truth, s), FilterPolicy::train());
    const auto est = build_pair_models(counts.kept, {.policy = EstimatorPolicy::RatioOnly});
    double err = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) err += std::abs(est[i].theta - truth[i].theta);
    return err / truth.size();
}

}  // namespace

TEST_CASE("point mixture population") {
    auto truth = sample_population(point_spec(0.8, 10, 5));
    REQUIRE(truth.size() == 10);
    for (const auto& m : truth) {
        CHECK(m.theta == 0.8);
        CHECK(m.provenance == Provenance::Simulated);
    }
    CHECK(truth.front().pair_id == "p0");
}

TEST_CASE("degenerate uniform population") {
    PopulationSpec s;
    s.n_pairs = 20;
    s.theta_distribution = UniformTheta{0.5, 0.5};
    for (const auto& m : sample_population(s)) CHECK(m.theta == 0.5);
}

TEST_CASE("populations are a function of the seed") {
    PopulationSpec s;
    s.n_pairs = 50;
    s.theta_distribution = BetaTheta{0.8, 5.0};
    s.seed = 9;
    CHECK(sample_population(s) == sample_population(s));
    auto other = s;
    other.seed = 10;
    CHECK_FALSE(sample_population(s) == sample_population(other));
    const auto a = sample_population(s);
    CHECK(sample_annotations(a, s) == sample_annotations(a, s));
}

TEST_CASE("thetas stay in range for every family") {
    PopulationSpec s;
    s.n_pairs = 300;
    for (ThetaDistribution d : {ThetaDistribution{UniformTheta{0.6, 0.9}},
                                ThetaDistribution{BetaTheta{0.9, 0.5}},
                                ThetaDistribution{PointMixtureTheta{{{0.5, 1}, {1.0, 2}}}}}) {
        s.theta_distribution = d;
        for (const auto& m : sample_population(s)) {
            CHECK(m.theta >= 0.5);
            CHECK(m.theta <= 1.0);
        }
    }
}

TEST_CASE("score probabilities satisfy the mean constraint") {
    for (ConfidenceModel model : {ConfidenceModel{1, 0, 0}, ConfidenceModel{0, 1, 0},
                                  ConfidenceModel{0, 0, 1}, ConfidenceModel{1, 2, 3}}) {
        for (int i = 0; i <= 50; ++i) {
            const double theta = 0.5 + i * 0.01;
            const auto q = score_probabilities(theta, model);
            CHECK(q[0] + q[1] + q[2] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(q[0] / 2 + 0.75 * q[1] + q[2] - theta) <= 1e-9);
            for (double v : q) CHECK(v >= 0.0);
        }
    }
    CHECK(score_probabilities(0.75, {0, 1, 0})[1] == 0.0);
    CHECK_THROWS_AS(score_probabilities(0.75, {0, 0, 0}), Error);
}

TEST_CASE("certain pairs are chosen unanimously and recovered exactly") {
    auto s = point_spec(1.0, 30, 10);
    s.confidence_model = {1, 1, 1};
    const auto truth = sample_population(s);
    const auto recs = sample_annotations(truth, s);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& m = truth[i / 10];
        CHECK(recs[i].choice == (m.flipped ? Choice::Second : Choice::First));
        CHECK(recs[i].confidence == 2);
    }
    const auto counts = filter_pairs(recs, FilterPolicy::test());
    for (const auto& m : build_pair_models(counts.kept)) {
        CHECK(m.provenance == Provenance::ConfidenceMLE);
        CHECK(m.theta == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fair pair splits evenly") {
    auto s = point_spec(0.5, 1, 100000);
    s.flip_probability = 0.0;
    const auto truth = sample_population(s);
    const auto recs = sample_annotations(truth, s);
    double first = 0;
    for (const auto& r : recs) first += r.choice == Choice::First;
    CHECK(std::abs(first / recs.size() - 0.5) <= 3 * std::sqrt(0.25 / recs.size()));
}

TEST_CASE("annotation rows and round-trip through the CSV layer") {
    PopulationSpec s;
    s.n_pairs = 100;
    s.annotators_per_pair = 5;
    const auto truth = sample_population(s);
    const auto recs = sample_annotations(truth, s);
    CHECK(recs.size() == 500);
    std::ostringstream out;
    write_annotations(recs, out);
    std::istringstream in(out.str());
    const auto back = parse_annotations(in);
    CHECK(back == recs);
    CHECK(filter_pairs(back, FilterPolicy::test()).kept.size() == 100);
}

TEST_CASE("second round collects scores only for unanimous pairs") {
    PopulationSpec s;
    s.n_pairs = 200;
    s.theta_distribution = UniformTheta{0.5, 1.0};
    s.second_round_annotators = 10;
    const auto truth = sample_population(s);
    const auto counts = filter_pairs(sample_annotations(truth, s), FilterPolicy::test());
    int extended = 0;
    for (const auto& c : counts.kept) {
        if (c.n == 15) {
            ++extended;
            REQUIRE(c.scores);
            CHECK(c.scores->total() == 10);
        } else {
            CHECK(c.n == 5);
            CHECK_FALSE(c.scores);
        }
    }
    CHECK(extended > 0);
}

TEST_CASE("more annotators give better ratio estimates") {
    CHECK(ratio_mae(15) < ratio_mae(5));
}

TEST_CASE("machine sequences") {
    PopulationSpec s;
    s.n_pairs = 2000;
    s.theta_distribution = UniformTheta{0.5, 1.0};
    const auto truth = sample_population(s);

    const auto modal = sample_machine_sequence(truth, {MachineMode::Modal}, 1);
    for (const auto& [id, bit] : modal.choices) CHECK(bit);

    const auto adversarial = sample_machine_sequence(truth, {MachineMode::Adversarial, 1.0}, 1);
    for (const auto& [id, bit] : adversarial.choices) CHECK_FALSE(bit);

    const auto human = sample_machine_sequence(truth, {MachineMode::Human}, 1);
    double ones = 0, expected = 0;
    for (const auto& m : truth) {
        ones += human.choices.at(m.pair_id);
        expected += m.theta;
    }
    CHECK(std::abs(ones - expected) <= 3 * std::sqrt(truth.size() * 0.25));
    CHECK(human == sample_machine_sequence(truth, {MachineMode::Human}, 1));
}

TEST_CASE("invalid specs") {
    PopulationSpec s;
    s.annotators_per_pair = 0;
    CHECK_THROWS_AS(validate(s), Error);
    s = {};
    s.theta_distribution = UniformTheta{0.4, 0.9};
    CHECK_THROWS_AS(validate(s), Error);
    s = {};
    s.flip_probability = 1.5;
    CHECK_THROWS_AS(validate(s), Error);
}
