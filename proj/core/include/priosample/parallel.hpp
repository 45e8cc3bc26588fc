#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "priosample/rng.hpp"

namespace priosample {

struct TrialBlock {
    std::size_t index;
    std::uint64_t seed;
    std::size_t trials;
};

/// Fixed partition of a trial budget into blocks. Depends only on the budget,
/// never on the machine, so parallel runs merge bit-identically everywhere.
inline std::vector<TrialBlock> partition_trials(std::size_t trials, std::uint64_t seed) {
    std::size_t n_blocks = trials / 50'000;
    if (n_blocks < 1)
        n_blocks = 1;
    if (n_blocks > 64)
        n_blocks = 64;
    std::vector<TrialBlock> blocks;
    blocks.reserve(n_blocks);
    std::size_t done = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        std::size_t count = trials / n_blocks + (b < trials % n_blocks ? 1 : 0);
        blocks.push_back({b, derive_seed(seed, b), count});
        done += count;
    }
    blocks.back().trials += trials - done;
    return blocks;
}

/// Runs fn over every block (possibly on several threads) and returns the
/// per-block results in block order; the caller merges them sequentially.
template <class R, class BlockFn>
std::vector<R> run_trial_blocks(std::size_t trials, std::uint64_t seed, BlockFn fn) {
    auto blocks = partition_trials(trials, seed);
    std::vector<R> results(blocks.size());
    unsigned n_threads = std::thread::hardware_concurrency();
    if (n_threads < 1)
        n_threads = 1;
    if (n_threads > blocks.size())
        n_threads = static_cast<unsigned>(blocks.size());

    if (n_threads == 1) {
        for (std::size_t b = 0; b < blocks.size(); ++b)
            results[b] = fn(blocks[b]);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= blocks.size() || failed.load())
                return;
            try {
                results[b] = fn(blocks[b]);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_threads; ++t)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    if (failed.load())
        std::rethrow_exception(failure);
    return results;
}

}  // namespace priosample
