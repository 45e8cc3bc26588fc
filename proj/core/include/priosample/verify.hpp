#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "priosample/analysis.hpp"
#include "priosample/scheme.hpp"

namespace priosample {

struct McOptions {
    std::size_t trials = 1'000'000;
    std::uint64_t seed = 1;
};

/// Monte Carlo moments of priority sampling over a fixed weight set: per-item
/// weight-estimate means, variance-estimator means, empirical variances (via
/// squared deviation from the known true weight), the k*tau statistic, and
/// optionally pairwise covariance terms and subset-sum moments. Trials run in
/// deterministic parallel blocks, so results are seed-reproducible.
struct PriorityMoments {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t trials = 0;

    std::vector<double> mean_estimate;
    std::vector<double> se_estimate;
    std::vector<std::uint64_t> hit_count;  // trials in which the item was sampled
    std::vector<double> mean_variance_estimator;
    std::vector<double> se_variance_estimator;
    std::vector<double> empirical_variance;
    std::vector<double> se_empirical_variance;
    double mean_k_tau = 0.0;
    double se_k_tau = 0.0;
    double max_abs_deviation = 0.0;  // max |estimate - weight| over all trials/items

    // covariance terms for requested pairs: mean of (wh_i - w_i)(wh_j - w_j)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::vector<double> mean_pair_cov;
    std::vector<double> se_pair_cov;

    // per requested subset: mean/se of the subset-sum estimate, mean of the
    // summed variance estimators, and the empirical variance of the estimate
    std::vector<double> subset_mean;
    std::vector<double> subset_se;
    std::vector<double> subset_mean_variance_estimator;
    std::vector<double> subset_se_variance_estimator;
    std::vector<double> subset_empirical_variance;
    std::vector<double> subset_se_empirical_variance;

    // per requested product set: mean/se of prod_{i in I} wh_i
    std::vector<double> product_mean;
    std::vector<double> product_se;
};

struct MomentRequest {
    bool pairwise = false;  // all pairs i<j (keep n small)
    std::vector<std::vector<std::uint32_t>> subsets;
    std::vector<std::vector<std::uint32_t>> products;
};

PriorityMoments priority_moments(std::span<const double> weights, std::size_t k,
                                 const McOptions& options, const MomentRequest& request = {});

/// Empirical Var of item 0's weight estimate on n unit weights under the
/// given scheme, simulated through the real reservoir implementations.
double mc_scheme_item_variance(SchemeTag scheme, std::size_t n, std::size_t k,
                               const McOptions& options,
                               WwrEstimator mode = WwrEstimator::presence);

/// Feasible inclusion probabilities with integer expected size k: waterfilled
/// p_i = min(1, c*g_i) over random positive g_i.
InclusionScheme random_feasible_marginals(std::size_t n, std::size_t k, SeededGenerator& gen);

// --- check reports -----------------------------------------------------------

struct CheckResult {
    std::string name;
    double estimate = 0.0;
    double target = 0.0;
    double std_error = 0.0;
    double tolerance = 0.0;  // the band actually applied
    bool pass = false;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& check : checks) {
            if (!check.pass)
                return false;
        }
        return true;
    }
};

CheckResult make_band_check(std::string name, double estimate, double target, double std_error,
                            double sigmas = 3.0);
CheckResult make_tolerance_check(std::string name, double estimate, double target,
                                 double tolerance);

/// Named identity checks over one weight set and sample size.
enum class IdentityCheck {
    item_means,           // E[estimate_i] = w_i, one band check per item
    variance_estimator,   // mean variance estimator vs empirical variance
    pairwise_covariance,  // all pairs within a band of zero
    threshold_identity,   // mean k*tau vs the total weight (unit-weight identity)
    sample_all_exact,     // k >= n reproduces every weight exactly
};

/// Monte Carlo verification of the requested identities at 3-sigma bands;
/// trials run in deterministic parallel blocks.
VerificationReport mc_verify(std::span<const double> weights, std::size_t k,
                             std::span<const IdentityCheck> checks, const McOptions& options);

/// Named verification suites (the CLI's `verify --suite ...`).
VerificationReport identity_suite(std::size_t trials, std::uint64_t seed);
VerificationReport closed_forms_suite(std::size_t trials, std::uint64_t seed);
VerificationReport oracle_suite(std::size_t trials, std::uint64_t seed);
VerificationReport exactify_suite(std::size_t vectors, std::uint64_t seed);
VerificationReport conjecture_suite(std::size_t trials, std::uint64_t seed);

}  // namespace priosample
