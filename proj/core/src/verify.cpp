#include "priosample/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "priosample/estimators.hpp"
#include "priosample/parallel.hpp"
#include "priosample/priority_reservoir.hpp"
#include "priosample/threshold_reservoir.hpp"
#include "priosample/uniform_reservoir.hpp"
#include "priosample/weighted_replacement.hpp"

namespace priosample {

namespace {

double mean_of(double sum, std::size_t trials) { return sum / static_cast<double>(trials); }

double se_of(double sum, double sum_sq, std::size_t trials) {
    double t = static_cast<double>(trials);
    double mean = sum / t;
    double variance = std::max(0.0, sum_sq / t - mean * mean);
    return std::sqrt(variance / t);
}

struct MomentSums {
    std::vector<std::uint64_t> hits;
    std::vector<double> w, w2;    // weight estimate and its square
    std::vector<double> v, v2;    // variance estimator
    std::vector<double> d2, d4;   // squared deviation from truth and its square
    double ktau = 0.0, ktau2 = 0.0;
    double max_abs_dev = 0.0;
    std::vector<double> pair, pair2;
    std::vector<double> sub, sub2, subv, subv2, subd2, subd4;
    std::vector<double> prod, prod2;

    void resize(std::size_t n, std::size_t pairs, std::size_t subsets, std::size_t products) {
        hits.assign(n, 0);
        w.assign(n, 0.0);
        w2.assign(n, 0.0);
        v.assign(n, 0.0);
        v2.assign(n, 0.0);
        d2.assign(n, 0.0);
        d4.assign(n, 0.0);
        pair.assign(pairs, 0.0);
        pair2.assign(pairs, 0.0);
        sub.assign(subsets, 0.0);
        sub2.assign(subsets, 0.0);
        subv.assign(subsets, 0.0);
        subv2.assign(subsets, 0.0);
        subd2.assign(subsets, 0.0);
        subd4.assign(subsets, 0.0);
        prod.assign(products, 0.0);
        prod2.assign(products, 0.0);
    }

    void merge(const MomentSums& other) {
        auto add = [](std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t i = 0; i < a.size(); ++i)
                a[i] += b[i];
        };
        for (std::size_t i = 0; i < hits.size(); ++i)
            hits[i] += other.hits[i];
        add(w, other.w);
        add(w2, other.w2);
        add(v, other.v);
        add(v2, other.v2);
        add(d2, other.d2);
        add(d4, other.d4);
        add(pair, other.pair);
        add(pair2, other.pair2);
        add(sub, other.sub);
        add(sub2, other.sub2);
        add(subv, other.subv);
        add(subv2, other.subv2);
        add(subd2, other.subd2);
        add(subd4, other.subd4);
        add(prod, other.prod);
        add(prod2, other.prod2);
        ktau += other.ktau;
        ktau2 += other.ktau2;
        max_abs_dev = std::max(max_abs_dev, other.max_abs_dev);
    }
};

}  // namespace

PriorityMoments priority_moments(std::span<const double> weights, std::size_t k,
                                 const McOptions& options, const MomentRequest& request) {
    const std::size_t n = weights.size();
    if (n == 0)
        throw std::invalid_argument("priority_moments: empty weight set");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    if (request.pairwise) {
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = i + 1; j < n; ++j)
                pairs.emplace_back(i, j);
        }
    }
    for (const auto& subset : request.subsets) {
        for (std::uint32_t id : subset) {
            if (id >= n)
                throw std::invalid_argument("priority_moments: subset id out of range");
        }
    }

    std::vector<double> w(weights.begin(), weights.end());
    auto blocks = run_trial_blocks<MomentSums>(
        options.trials, options.seed, [&, w](const TrialBlock& block) {
            SeededGenerator gen(block.seed);
            PriorityReservoir reservoir(k);
            std::vector<double> estimate(n);
            std::vector<double> vhat(n);
            MomentSums sums;
            sums.resize(n, pairs.size(), request.subsets.size(), request.products.size());
            for (std::size_t t = 0; t < block.trials; ++t) {
                reservoir.clear();
                for (std::size_t i = 0; i < n; ++i) {
                    ItemRecord item;
                    item.id = i;
                    item.weight = w[i];
                    reservoir.insert(prioritize(std::move(item), gen.next_alpha()));
                }
                PrioritySample sample = reservoir.finalize();
                std::fill(estimate.begin(), estimate.end(), 0.0);
                std::fill(vhat.begin(), vhat.end(), 0.0);
                for (const auto& entry : sample.entries) {
                    double est = std::max(entry.weight(), sample.threshold);
                    estimate[entry.id()] = est;
                    vhat[entry.id()] =
                        sample.threshold * std::max(0.0, sample.threshold - entry.weight());
                    ++sums.hits[entry.id()];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double dev = estimate[i] - w[i];
                    sums.w[i] += estimate[i];
                    sums.w2[i] += estimate[i] * estimate[i];
                    sums.v[i] += vhat[i];
                    sums.v2[i] += vhat[i] * vhat[i];
                    sums.d2[i] += dev * dev;
                    sums.d4[i] += dev * dev * dev * dev;
                    sums.max_abs_dev = std::max(sums.max_abs_dev, std::abs(dev));
                }
                double ktau = static_cast<double>(k) * sample.threshold;
                sums.ktau += ktau;
                sums.ktau2 += ktau * ktau;
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    double z = (estimate[pairs[p].first] - w[pairs[p].first]) *
                               (estimate[pairs[p].second] - w[pairs[p].second]);
                    sums.pair[p] += z;
                    sums.pair2[p] += z * z;
                }
                for (std::size_t s = 0; s < request.subsets.size(); ++s) {
                    double est_sum = 0.0;
                    double v_sum = 0.0;
                    double truth = 0.0;
                    for (std::uint32_t id : request.subsets[s]) {
                        est_sum += estimate[id];
                        v_sum += vhat[id];
                        truth += w[id];
                    }
                    double dev = est_sum - truth;
                    sums.sub[s] += est_sum;
                    sums.sub2[s] += est_sum * est_sum;
                    sums.subv[s] += v_sum;
                    sums.subv2[s] += v_sum * v_sum;
                    sums.subd2[s] += dev * dev;
                    sums.subd4[s] += dev * dev * dev * dev;
                }
                for (std::size_t s = 0; s < request.products.size(); ++s) {
                    double prod = 1.0;
                    for (std::uint32_t id : request.products[s])
                        prod *= estimate[id];
                    sums.prod[s] += prod;
                    sums.prod2[s] += prod * prod;
                }
            }
            return sums;
        });

    MomentSums total;
    total.resize(n, pairs.size(), request.subsets.size(), request.products.size());
    for (const auto& block : blocks)
        total.merge(block);

    PriorityMoments out;
    out.n = n;
    out.k = k;
    out.trials = options.trials;
    out.pairs = std::move(pairs);
    out.max_abs_deviation = total.max_abs_dev;
    out.hit_count = total.hits;
    for (std::size_t i = 0; i < n; ++i) {
        out.mean_estimate.push_back(mean_of(total.w[i], options.trials));
        out.se_estimate.push_back(se_of(total.w[i], total.w2[i], options.trials));
        out.mean_variance_estimator.push_back(mean_of(total.v[i], options.trials));
        out.se_variance_estimator.push_back(se_of(total.v[i], total.v2[i], options.trials));
        out.empirical_variance.push_back(mean_of(total.d2[i], options.trials));
        out.se_empirical_variance.push_back(se_of(total.d2[i], total.d4[i], options.trials));
    }
    out.mean_k_tau = mean_of(total.ktau, options.trials);
    out.se_k_tau = se_of(total.ktau, total.ktau2, options.trials);
    for (std::size_t p = 0; p < out.pairs.size(); ++p) {
        out.mean_pair_cov.push_back(mean_of(total.pair[p], options.trials));
        out.se_pair_cov.push_back(se_of(total.pair[p], total.pair2[p], options.trials));
    }
    for (std::size_t s = 0; s < request.subsets.size(); ++s) {
        out.subset_mean.push_back(mean_of(total.sub[s], options.trials));
        out.subset_se.push_back(se_of(total.sub[s], total.sub2[s], options.trials));
        out.subset_mean_variance_estimator.push_back(mean_of(total.subv[s], options.trials));
        out.subset_se_variance_estimator.push_back(
            se_of(total.subv[s], total.subv2[s], options.trials));
        out.subset_empirical_variance.push_back(mean_of(total.subd2[s], options.trials));
        out.subset_se_empirical_variance.push_back(
            se_of(total.subd2[s], total.subd4[s], options.trials));
    }
    for (std::size_t s = 0; s < request.products.size(); ++s) {
        out.product_mean.push_back(mean_of(total.prod[s], options.trials));
        out.product_se.push_back(se_of(total.prod[s], total.prod2[s], options.trials));
    }
    return out;
}

double mc_scheme_item_variance(SchemeTag scheme, std::size_t n, std::size_t k,
                               const McOptions& options, WwrEstimator mode) {
    struct Sums {
        double d2 = 0.0;
    };
    auto blocks = run_trial_blocks<Sums>(
        options.trials, options.seed, [=](const TrialBlock& block) {
            SeededGenerator gen(block.seed);
            Sums sums;
            for (std::size_t t = 0; t < block.trials; ++t) {
                double estimate = 0.0;
                switch (scheme) {
                    case SchemeTag::pri: {
                        PriorityReservoir reservoir(k);
                        for (std::size_t i = 0; i < n; ++i) {
                            ItemRecord item;
                            item.id = i;
                            item.weight = 1.0;
                            reservoir.insert(prioritize(std::move(item), gen.next_alpha()));
                        }
                        estimate = pri_weight_estimate(reservoir.finalize(), 0);
                        break;
                    }
                    case SchemeTag::thr: {
                        ThresholdReservoir reservoir(k);
                        for (std::size_t i = 0; i < n; ++i) {
                            ItemRecord item;
                            item.id = i;
                            item.weight = 1.0;
                            reservoir.insert(prioritize(std::move(item), gen.next_alpha()));
                        }
                        estimate = thr_weight_estimate(reservoir.finalize(), 0);
                        break;
                    }
                    case SchemeTag::uwr: {
                        UniformReservoir reservoir(k);
                        for (std::size_t i = 0; i < n; ++i) {
                            ItemRecord item;
                            item.id = i;
                            item.weight = 1.0;
                            reservoir.insert(item, gen);
                        }
                        estimate = uwr_weight_estimate(reservoir.finalize(), 0);
                        break;
                    }
                    case SchemeTag::wwr: {
                        WeightedReplacementSampler sampler(k);
                        for (std::size_t i = 0; i < n; ++i) {
                            ItemRecord item;
                            item.id = i;
                            item.weight = 1.0;
                            sampler.insert(item, gen);
                        }
                        estimate = wwr_weight_estimate(sampler.finalize(), 0, mode);
                        break;
                    }
                }
                double dev = estimate - 1.0;
                sums.d2 += dev * dev;
            }
            return sums;
        });
    double total = 0.0;
    for (const auto& block : blocks)
        total += block.d2;
    return total / static_cast<double>(options.trials);
}

InclusionScheme random_feasible_marginals(std::size_t n, std::size_t k, SeededGenerator& gen) {
    if (k > n)
        throw std::invalid_argument("random_feasible_marginals: k > n");
    std::vector<double> gains(n);
    for (double& g : gains)
        g = 0.05 + gen.next_alpha();
    // Waterfill: p_i = min(1, c * g_i) with c solving sum p = k.
    auto filled_sum = [&](double c) {
        double sum = 0.0;
        for (double g : gains)
            sum += std::min(1.0, c * g);
        return sum;
    };
    double lo = 0.0, hi = 1.0;
    while (filled_sum(hi) < static_cast<double>(k))
        hi *= 2.0;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        (filled_sum(mid) < static_cast<double>(k) ? lo : hi) = mid;
    }
    InclusionScheme scheme;
    scheme.k = k;
    scheme.probabilities.resize(n);
    double c = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i)
        scheme.probabilities[i] = std::min(1.0, c * gains[i]);
    // Absorb the bisection residue into an unsaturated coordinate.
    double residue = static_cast<double>(k) -
                     std::accumulate(scheme.probabilities.begin(), scheme.probabilities.end(), 0.0);
    for (std::size_t i = 0; i < n && residue != 0.0; ++i) {
        double& p = scheme.probabilities[i];
        double adjusted = p + residue;
        if (adjusted > 0.0 && adjusted < 1.0) {
            p = adjusted;
            residue = 0.0;
        }
    }
    return scheme;
}

CheckResult make_band_check(std::string name, double estimate, double target, double std_error,
                            double sigmas) {
    CheckResult check;
    check.name = std::move(name);
    check.estimate = estimate;
    check.target = target;
    check.std_error = std_error;
    check.tolerance = sigmas * std_error;
    check.pass = std::abs(estimate - target) <= check.tolerance;
    return check;
}

CheckResult make_tolerance_check(std::string name, double estimate, double target,
                                 double tolerance) {
    CheckResult check;
    check.name = std::move(name);
    check.estimate = estimate;
    check.target = target;
    check.std_error = 0.0;
    check.tolerance = tolerance;
    check.pass = std::abs(estimate - target) <= tolerance;
    return check;
}

VerificationReport mc_verify(std::span<const double> weights, std::size_t k,
                             std::span<const IdentityCheck> checks, const McOptions& options) {
    bool want_pairs = false;
    for (IdentityCheck check : checks)
        want_pairs = want_pairs || check == IdentityCheck::pairwise_covariance;

    MomentRequest request;
    request.pairwise = want_pairs;
    PriorityMoments moments = priority_moments(weights, k, options, request);

    VerificationReport report;
    for (IdentityCheck check : checks) {
        switch (check) {
            case IdentityCheck::item_means:
                for (std::size_t i = 0; i < weights.size(); ++i) {
                    std::ostringstream name;
                    name << "mean estimate[" << i << "]";
                    report.checks.push_back(make_band_check(name.str(), moments.mean_estimate[i],
                                                            weights[i], moments.se_estimate[i]));
                }
                break;
            case IdentityCheck::variance_estimator:
                for (std::size_t i = 0; i < weights.size(); ++i) {
                    std::ostringstream name;
                    name << "variance estimator vs empirical[" << i << "]";
                    double joint = std::hypot(moments.se_variance_estimator[i],
                                              moments.se_empirical_variance[i]);
                    report.checks.push_back(
                        make_band_check(name.str(),
                                        moments.mean_variance_estimator[i] -
                                            moments.empirical_variance[i],
                                        0.0, joint));
                }
                break;
            case IdentityCheck::pairwise_covariance:
                for (std::size_t p = 0; p < moments.pairs.size(); ++p) {
                    std::ostringstream name;
                    name << "covariance (" << moments.pairs[p].first << ","
                         << moments.pairs[p].second << ")";
                    report.checks.push_back(make_band_check(name.str(), moments.mean_pair_cov[p],
                                                            0.0, moments.se_pair_cov[p]));
                }
                break;
            case IdentityCheck::threshold_identity: {
                double total = std::accumulate(weights.begin(), weights.end(), 0.0);
                report.checks.push_back(make_band_check("mean k*tau vs total weight",
                                                        moments.mean_k_tau, total,
                                                        moments.se_k_tau));
                break;
            }
            case IdentityCheck::sample_all_exact:
                report.checks.push_back(make_tolerance_check("max |estimate - weight|",
                                                             moments.max_abs_deviation, 0.0,
                                                             0.0));
                break;
        }
    }
    return report;
}

}  // namespace priosample
