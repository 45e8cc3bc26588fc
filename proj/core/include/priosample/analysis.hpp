#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "priosample/rng.hpp"
#include "priosample/scheme.hpp"

namespace priosample {

// --- closed forms -------------------------------------------------------------

/// Variance of one item's weight estimate on a stream of n unit weights, per
/// scheme. Returns nullopt for priority sampling with k = 1, whose variance
/// is unbounded rather than a number.
std::optional<double> unit_item_variance(SchemeTag scheme, std::size_t n, std::size_t k,
                                         WwrEstimator mode = WwrEstimator::presence);

/// v(w, tau) = w * max{0, tau - w}: variance of the weight estimate of an
/// item of weight w sampled against a fixed threshold tau.
inline double fixed_threshold_item_variance(double w, double tau) {
    return w * (tau > w ? tau - w : 0.0);
}

/// Probability that the smaller of two items outranks the larger one by
/// priority: 1/(2r) for weight ratio r = w_large/w_small >= 1.
double pair_inversion_probability(double w_small, double w_large);

/// Threshold solving sum(min{1, w_i/tau}) = k over the whole weight set;
/// 0 when k is at least the number of positive weights (everything kept).
double solve_fixed_threshold(std::span<const double> weights, std::size_t k);

// --- exact oracle ---------------------------------------------------------------

enum class OracleStatistic {
    mean,           // E[what_target]
    second_moment,  // E[what_target^2]
    product_mean,   // E[what_target * what_other]
};

enum class OracleMethod { monte_carlo, grid };

struct OracleOptions {
    std::size_t trials = 10'000'000;
    std::uint64_t seed = 1;
    OracleMethod method = OracleMethod::monte_carlo;
    /// Midpoint cells per axis for the grid rule (grid works for n <= 3; the
    /// integrand is piecewise smooth in alpha, so accuracy is O(1/resolution)).
    std::size_t grid_resolution = 400;
};

struct OracleResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for the grid rule (deterministic, biased O(1/m))
    std::string method;
};

/// Brute-force statistics of priority-sampling weight estimates over the
/// alpha hypercube, for instances of at most 4 items. Default is Monte Carlo
/// with a reported standard error; a midpoint grid rule is available for
/// n <= 3 as an independent cross-check. Refuses larger instances.
OracleResult exact_oracle(std::span<const double> weights, std::size_t k, std::size_t target,
                          OracleStatistic stat,
                          std::size_t other = std::numeric_limits<std::size_t>::max(),
                          const OracleOptions& options = {});

// --- exact-k construction -------------------------------------------------------

/// Independent per-item inclusion probabilities with integer expected size.
struct InclusionScheme {
    std::vector<double> probabilities;
    std::size_t k = 0;
};

/// One branch of the mixture: with probability `mass`, pick every forced item
/// plus `pool_take` items uniformly from the pool. The uniform block is kept
/// symbolic so inclusion probabilities are exact without enumerating subsets.
struct ExactKEvent {
    double mass = 0.0;
    std::vector<std::uint32_t> forced;
    std::vector<std::uint32_t> pool;
    std::uint32_t pool_take = 0;

    std::size_t picked_count() const { return forced.size() + pool_take; }
    double inclusion(std::uint32_t item) const;
};

/// Convert an independent inclusion scheme into a mixture of exactly-k events
/// preserving every per-item inclusion probability. At most n events; each
/// iteration settles at least one item. Rejects probabilities outside [0,1]
/// or a non-integer expected size.
std::vector<ExactKEvent> exactify(const InclusionScheme& scheme);

/// Inclusion probability of an item under the event mixture.
double inclusion_probability(std::span<const ExactKEvent> events, std::uint32_t item);

/// Draw one exactly-k item set from the mixture.
std::vector<std::uint32_t> sample_exact_k(std::span<const ExactKEvent> events,
                                          SeededGenerator& gen);

// --- conjectured ordering --------------------------------------------------------

/// Empirical comparison of total variance: threshold sampling with expected k
/// samples versus priority sampling with k+1 samples. The threshold side is
/// exact; the priority side is an oracle or Monte Carlo estimate with a
/// standard error. Evidence only, never a proof.
struct ConjectureComparison {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t trials = 0;
    double thr_threshold = 0.0;
    double thr_total_variance = 0.0;
    double pri_total_variance = 0.0;
    double pri_std_error = 0.0;
    bool ordering_observed = false;  // pri[k+1] <= thr[k] within 3 standard errors
    std::string method;
};

ConjectureComparison conjecture_compare(std::span<const double> weights, std::size_t k,
                                        std::size_t trials, std::uint64_t seed);

}  // namespace priosample
