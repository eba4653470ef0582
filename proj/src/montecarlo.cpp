#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "detail.hpp"
#include "rankq/error.hpp"
#include "rankq/qcompute.hpp"
#include "rankq/rng.hpp"

namespace rankq {
namespace {

// Samples are drawn in fixed-size chunks, each with its own engine seeded
// from (seed, chunk index); the estimate is therefore the same for any
// number of worker threads.
constexpr std::size_t kChunkSize = 4096;
constexpr std::uint64_t kMonteCarloStream = 0x4d43;  // "MC"

struct ChunkTally {
    std::size_t at_least = 0;
    std::size_t ties = 0;
};

}  // namespace

QResult q_montecarlo(const GroupedModel& grouped, const RankingSequence& x, std::size_t samples,
                     std::uint64_t seed, unsigned threads) {
    if (samples < 1) throw Error("Monte Carlo needs at least one sample");

    const auto k_x = count_ones(grouped, x);
    const auto terms = detail::group_terms(grouped);
    QResult result;
    result.method = QMethod::MonteCarlo;
    result.target_log_p = block_log_prob(grouped, k_x);
    const bool zero_target = result.target_log_p == detail::kNegInf;
    const double tol = zero_target ? 0.0 : tie_tolerance(result.target_log_p);
    const double lower = result.target_log_p - tol;
    const double upper = result.target_log_p + tol;

    const std::size_t chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<ChunkTally> tallies(chunks);

    auto run_chunk = [&](std::size_t c) {
        std::mt19937_64 engine(derive_seed(seed, kMonteCarloStream, c));
        const std::size_t begin = c * kChunkSize;
        const std::size_t end = std::min(samples, begin + kChunkSize);
        ChunkTally tally;
        for (std::size_t s = begin; s < end; ++s) {
            double lp = 0.0;
            for (const auto& t : terms) {
                int k = 0;
                for (int i = 0; i < t.n; ++i) k += unit_uniform(engine) < t.theta ? 1 : 0;
                lp += t.log_p(k);
            }
            if (lp >= lower) {
                ++tally.at_least;
                if (!zero_target && lp <= upper) ++tally.ties;
            }
        }
        tallies[c] = tally;
    };

    unsigned workers = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
            });
        }
    }

    std::size_t at_least = 0;
    std::size_t ties = 0;
    for (const auto& t : tallies) {
        at_least += t.at_least;
        ties += t.ties;
    }
    const double n = static_cast<double>(samples);
    result.q = at_least / n;
    result.tie_mass = ties / n;
    result.mc_stderr = std::sqrt(result.q * (1.0 - result.q) / n);
    return result;
}

}  // namespace rankq
