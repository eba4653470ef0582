// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "rankq/commands.hpp"
#include "rankq/estimation.hpp"
#include "rankq/format.hpp"
#include "rankq/qcompute.hpp"
#include "rankq/simulator.hpp"

using namespace rankq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

struct TestModel {
    std::vector<PairModel> models;
    RankingSequence x;
};

// Models with N <= 12 and 1-4 distinct thetas; half on the 0.05 grid over
// [0.5, 1], half arbitrary reals in [0, 1].
std::vector<TestModel> random_models(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_pairs(1, 12), n_groups(1, 4), grid(0, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TestModel> out;
    for (std::size_t t = 0; t < count; ++t) {
        const int N = n_pairs(rng);
        const int G = std::min(N, n_groups(rng));
        std::vector<double> levels(G);
        for (auto& l : levels) l = t % 2 == 0 ? 0.5 + 0.05 * grid(rng) : u(rng);
        TestModel m;
        for (int i = 0; i < N; ++i) {
            const std::string id = "p" + std::to_string(i);
            const double theta = levels[i % G];
            m.models.push_back({id, theta, false, Provenance::Imported});
            m.x.choices[id] = u(rng) < 0.5;
        }
        out.push_back(std::move(m));
    }
    return out;
}

double oracle_log_likelihood(double theta, double q2, int n, const ScoreCounts& s) {
    const double q1 = 4.0 * theta - 2.0 - 2.0 * q2;
    const double q0 = 3.0 - 4.0 * theta + q2;
    if (q0 < -1e-12 || q1 < -1e-12 || q2 < -1e-12) return -std::numeric_limits<double>::infinity();
    double ll = n * std::log(theta);
    if (s.n0) ll += s.n0 * std::log(std::max(q0, 0.0));
    if (s.n1) ll += s.n1 * std::log(std::max(q1, 0.0));
    if (s.n2) ll += s.n2 * std::log(std::max(q2, 0.0));
    return ll;
}

// Largest probability shared by one class of equally probable sequences.
double max_tie_class_mass(const GroupedModel& g) {
    const auto table = enumerate_blocks(g);
    double best = 0.0;
    double run = 0.0;
    double anchor = std::numeric_limits<double>::quiet_NaN();
    for (const auto& b : table.blocks()) {
        if (!(std::abs(b.log_p - anchor) <= tie_tolerance(anchor))) {
            best = std::max(best, run);
            run = 0.0;
            anchor = b.log_p;
        }
        run += std::exp(b.log_m + b.log_p);
    }
    return std::max(best, run);
}

Outcome oracle_equivalence() {
    Outcome o;
    const auto t0 = Clock::now();
    double worst_gap = 0.0;
    double worst_bound = 0.0;
    for (const auto& m : random_models(200, 1)) {
        const auto g = group_pairs(m.models);
        const double exact = q_exact(enumerate_blocks(g), g, m.x).q;
        const double brute = q_bruteforce(m.models, m.x).q;
        const auto dp = q_dp(g, m.x);
        worst_gap = std::max(worst_gap, std::abs(exact - brute));
        worst_bound = std::max(worst_bound, *dp.error_bound);
        o.require(std::abs(exact - brute) <= 1e-9, "exact and brute force differ");
        o.require(std::abs(dp.q - brute) <= *dp.error_bound + 1e-12, "DP outside its bound");
        o.require(*dp.error_bound <= 1e-4, "DP bound above 1e-4");
    }
    const double secs = seconds_since(t0);
    o.require(secs < 30.0, "slower than 30 s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "max |exact-brute| %.2e, max DP bound %.2e, %.2f s", worst_gap,
                  worst_bound, secs);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome normalization() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> n_groups(1, 6), size(1, 30);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::vector<PairModel> models;
        const int G = n_groups(rng);
        int id = 0;
        for (int g = 0; g < G; ++g) {
            const double theta = u(rng);
            const int n = size(rng);
            for (int i = 0; i < n; ++i) {
                models.push_back({"p" + std::to_string(id++), theta, false, Provenance::Imported});
            }
        }
        const auto grouped = group_pairs(models);
        if (block_count(grouped) > 2'000'000) continue;
        const double total = enumerate_blocks(grouped).total_mass();
        worst = std::max(worst, std::abs(total - 1.0));
    }
    o.require(worst <= 1e-9, "block masses do not sum to 1");
    char buf[80];
    std::snprintf(buf, sizeof buf, "max |sum - 1| %.2e", worst);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome confidence_mle() {
    Outcome o;
    auto unanimous = [](int n0, int n1, int n2) {
        return PairCounts{"p", n0 + n1 + n2, n0 + n1 + n2, ScoreCounts{n0, n1, n2}};
    };
    o.require(std::abs(estimate_confidence(unanimous(0, 0, 10)).theta - 1.0) <= 1e-6, "n2 = n");
    o.require(std::abs(estimate_confidence(unanimous(10, 0, 0)).theta - 0.5) <= 1e-6, "n0 = n");

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> level(0, 15);
    double worst_constraint = 0.0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 100; ++t) {
        ScoreCounts s{level(rng), level(rng), level(rng)};
        if (s.total() == 0) s.n1 = 1;
        const auto sol = estimate_confidence(unanimous(s.n0, s.n1, s.n2));
        worst_constraint = std::max({worst_constraint, std::abs(sol.q0 + sol.q1 + sol.q2 - 1.0),
                                     std::abs(sol.q0 / 2 + 0.75 * sol.q1 + sol.q2 - sol.theta)});
        double grid_best = -std::numeric_limits<double>::infinity();
        for (int i = 500; i <= 1000; ++i) {
            for (int j = 0; j <= 1000; ++j) {
                grid_best = std::max(grid_best, oracle_log_likelihood(i / 1000.0, j / 1000.0, s.total(), s));
            }
        }
        worst_gap = std::max(worst_gap, grid_best - sol.log_likelihood);
    }
    o.require(worst_constraint <= 1e-6, "constraints violated");
    o.require(worst_gap <= 1e-8, "grid beats the solver");
    char buf[120];
    std::snprintf(buf, sizeof buf, "max constraint error %.2e, grid - solver %.2e", worst_constraint,
                  worst_gap);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome degeneracy() {
    Outcome o;
    std::vector<PairCounts> counts{{"u", 5, 5, ScoreCounts{0, 1, 4}}, {"s", 5, 3, std::nullopt}};
    const auto models = build_pair_models(counts, {.policy = EstimatorPolicy::RatioOnly});
    o.require(models[0].theta == 1.0, "unanimous ratio estimate is not 1");
    const auto g = group_pairs(models);
    RankingSequence x{{{"u", false}, {"s", true}}};
    const auto r = compute_q(g, x);
    o.require(r.q == 1.0, "q is not 1");
    o.require(format_percent(r.q) == "100", "q does not render as 100");
    o.require(decide(r.q, 0.1) == Decision::Distinguishable, "verdict is not Distinguishable");
    if (o.pass) o.detail = "Q = " + format_percent(r.q) + "%, " + to_string(decide(r.q, 0.1));
    return o;
}

Outcome sampling_consistency() {
    Outcome o;
    const auto t0 = Clock::now();
    PopulationSpec spec;
    spec.n_pairs = 200;
    spec.theta_distribution = PointMixtureTheta{{{0.8, 1.0}}};
    spec.seed = 11;
    const auto truth = sample_population(spec);
    const auto g = group_pairs(truth);
    const double tie_bound = max_tie_class_mass(g);

    const int draws = 1000;
    int distinguishable = 0;
    for (int s = 0; s < draws; ++s) {
        const auto x = sample_machine_sequence(truth, {MachineMode::Human}, static_cast<std::uint64_t>(s));
        distinguishable += decide(q_dp(g, x).q, 0.1) == Decision::Distinguishable;
    }
    const double frac = static_cast<double>(distinguishable) / draws;
    const double limit = 0.1 + tie_bound;
    const double tolerance = 3.0 * std::sqrt(limit * (1.0 - limit) / draws);
    const double secs = seconds_since(t0);
    o.require(frac <= limit + tolerance, "too many Human sequences flagged");
    o.require(secs < 60.0, "slower than 60 s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "flagged %.3f <= %.3f + %.3f (tie class %.3f), %.2f s", frac, limit,
                  tolerance, tie_bound, secs);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome modal_minimality() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> coin(0, 1);
    int models_checked = 0;
    for (const auto& m : random_models(200, 5)) {
        const auto g = group_pairs(m.models);
        const auto table = enumerate_blocks(g);
        RankingSequence modal;
        for (const auto& [id, member] : g.index) modal.choices[id] = !member.inverted;
        const auto best = q_exact(table, g, modal);
        o.require(std::abs(best.q - best.tie_mass) <= 1e-9, "modal q differs from its tie mass");
        for (int s = 0; s < 1000; ++s) {
            RankingSequence x;
            for (const auto& p : m.models) x.choices[p.pair_id] = coin(rng);
            o.require(q_exact(table, g, x).q >= best.q - 1e-9, "a sequence beats the modal one");
        }
        ++models_checked;
    }
    if (o.pass) o.detail = std::to_string(models_checked) + " models x 1000 sequences";
    return o;
}

Outcome scale() {
    Outcome o;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<PairModel> big;
    RankingSequence x;
    for (int i = 0; i < 300; ++i) {
        const std::string id = "p" + std::to_string(i);
        const double theta = 0.5 + 0.05 * (i % 11);
        big.push_back({id, theta, false, Provenance::Imported});
        x.choices[id] = u(rng) < theta;
    }
    const auto g = group_pairs(big);
    auto t0 = Clock::now();
    const auto dp = q_dp(g, x);
    const double dp_secs = seconds_since(t0);
    o.require(g.groups.size() == 11, "expected 11 groups");
    o.require(dp_secs < 5.0, "DP slower than 5 s");

    // Seven groups of nine pairs: J = 10^7.
    std::vector<PairModel> wide;
    RankingSequence y;
    for (int i = 0; i < 63; ++i) {
        const std::string id = "p" + std::to_string(i);
        const double theta = 0.55 + 0.06 * (i % 7);
        wide.push_back({id, theta, false, Provenance::Imported});
        y.choices[id] = u(rng) < theta;
    }
    const auto gw = group_pairs(wide);
    o.require(block_count(gw) == 10'000'000, "expected J = 1e7");
    t0 = Clock::now();
    const auto ex = compute_q(gw, y);
    const double ex_secs = seconds_since(t0);
    o.require(ex.method == QMethod::Exact, "enumeration path not taken");
    o.require(ex_secs < 10.0, "enumeration slower than 10 s");

    char buf[160];
    std::snprintf(buf, sizeof buf, "DP N=300 G=11 %.2f s (bound %.1e); enumeration J=1e7 %.2f s",
                  dp_secs, *dp.error_bound, ex_secs);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome formatting() {
    Outcome o;
    o.require(format_percent(0.938) == "93.8", "0.938 renders wrong");
    o.require(flag_cell(0.938, 0.1), "0.938 not flagged");
    o.require(format_percent(0.891) == "89.1", "0.891 renders wrong");
    o.require(!flag_cell(0.891, 0.1), "0.891 flagged");
    o.require(!flag_cell(0.9, 0.1), "exactly 90.0 flagged");
    o.require(flag_cell(std::nextafter(0.9, 1.0), 0.1), "just above 90.0 not flagged");
    if (o.pass) o.detail = "93.8 flagged, 89.1 and 90.0 not";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome o;
    const auto base = fs::temp_directory_path() / "rankq_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    {
        std::ofstream(base / "spec.json") << R"({"n_pairs": 300, "seed": 21,
            "second_round_annotators": 10,
            "theta": {"family": "beta", "mean": 0.8, "concentration": 3},
            "confidence": {"max_entropy": 1, "polarized": 1},
            "machines": [{"name": "h", "mode": "human", "count": 3}]})";
    }
    RunConfig config;
    std::ostringstream sink;
    for (const char* run : {"a", "b"}) {
        cmd_simulate((base / "spec.json").string(), (base / run).string(), config, sink, sink);
        cmd_estimate((base / run / "annotations.csv").string(), (base / run / "est.csv").string(),
                     config, sink, sink);
    }
    for (const char* f : {"annotations.csv", "truth.csv", "predictions_h_0.csv", "predictions_h_2.csv",
                          "est.csv"}) {
        const auto a = slurp(base / "a" / f);
        o.require(!a.empty() && a == slurp(base / "b" / f), std::string("simulate differs in ") + f);
    }

    std::ostringstream eval_a, eval_b, err;
    config.json = true;
    config.enumeration_cap = 1;
    cmd_evaluate((base / "a/est.csv").string(), (base / "a/predictions_h_0.csv").string(), config, eval_a, err);
    cmd_evaluate((base / "b/est.csv").string(), (base / "b/predictions_h_0.csv").string(), config, eval_b, err);
    o.require(!eval_a.str().empty() && eval_a.str() == eval_b.str(), "evaluate output differs");

    const auto models = random_models(1, 9).front();
    const auto g = group_pairs(models.models);
    const auto one = q_montecarlo(g, models.x, 100'000, 42, 1);
    const auto four = q_montecarlo(g, models.x, 100'000, 42, 4);
    const auto again = q_montecarlo(g, models.x, 100'000, 42, 1);
    o.require(one.q == four.q && one.tie_mass == four.tie_mass, "Monte Carlo depends on threads");
    o.require(one.q == again.q, "Monte Carlo differs between runs");
    fs::remove_all(base);
    if (o.pass) o.detail = "simulate, estimate, evaluate and Monte Carlo (1 vs 4 threads) identical";
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"oracle equivalence", oracle_equivalence},
        {"normalization", normalization},
        {"confidence MLE boundaries", confidence_mle},
        {"certain-pair degeneracy", degeneracy},
        {"sampling consistency", sampling_consistency},
        {"modal minimality", modal_minimality},
        {"scale", scale},
        {"threshold and formatting", formatting},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", index - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
