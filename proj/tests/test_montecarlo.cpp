#include <cmath>
#include <random>

#include "doctest.h"
#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"

using namespace rankq;

namespace {

struct Model {
    std::vector<PairModel> models;
    RankingSequence x;
};

Model mixed_model() {
    Model m;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double levels[] = {0.95, 0.8, 0.7, 0.55};
    for (int i = 0; i < 12; ++i) {
        const std::string id = "p" + std::to_string(i);
        m.models.push_back({id, levels[i % 4], false, Provenance::Imported});
        m.x.choices[id] = u(rng) < levels[i % 4];
    }
    return m;
}

}  // namespace

TEST_CASE("single pair estimate is close to 0.9") {
    std::vector<PairModel> m{{"a", 0.9, false, Provenance::Imported}};
    RankingSequence x{{{"a", true}}};
    const auto r = q_montecarlo(group_pairs(m), x, 100000, 1);
    REQUIRE(r.mc_stderr);
    CHECK(std::abs(r.q - 0.9) <= 3 * *r.mc_stderr);
}

TEST_CASE("estimate agrees with the brute force value") {
    auto m = mixed_model();
    const double exact = q_bruteforce(m.models, m.x).q;
    const auto r = q_montecarlo(group_pairs(m.models), m.x, 200000, 8);
    CHECK(std::abs(r.q - exact) <= 3 * *r.mc_stderr + 1e-12);
}

TEST_CASE("same seed gives the same estimate for any thread count") {
    auto m = mixed_model();
    auto g = group_pairs(m.models);
    const auto a = q_montecarlo(g, m.x, 50000, 123, 1);
    const auto b = q_montecarlo(g, m.x, 50000, 123, 1);
    const auto c = q_montecarlo(g, m.x, 50000, 123, 4);
    CHECK(a.q == b.q);
    CHECK(a.q == c.q);
    CHECK(a.tie_mass == c.tie_mass);
    const auto d = q_montecarlo(g, m.x, 50000, 124, 1);
    CHECK(a.q != d.q);
}

TEST_CASE("zero probability target") {
    std::vector<PairModel> m{{"a", 1.0, false, Provenance::Imported}};
    RankingSequence x{{{"a", false}}};
    CHECK(q_montecarlo(group_pairs(m), x, 10, 1).q == 1.0);
    CHECK_THROWS_AS(q_montecarlo(group_pairs(m), x, 0, 1), Error);
}
