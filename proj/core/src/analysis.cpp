#include "priosample/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "priosample/item.hpp"
#include "priosample/parallel.hpp"
#include "priosample/priority_reservoir.hpp"

namespace priosample {

std::optional<double> unit_item_variance(SchemeTag scheme, std::size_t n, std::size_t k,
                                         WwrEstimator mode) {
    if (k < 1 || k > n)
        throw std::invalid_argument("unit_item_variance: need 1 <= k <= n");
    double nd = static_cast<double>(n);
    double kd = static_cast<double>(k);
    switch (scheme) {
        case SchemeTag::uwr:
            return (nd - kd) / kd;
        case SchemeTag::thr:
            return fixed_threshold_item_variance(1.0, nd / kd);
        case SchemeTag::wwr: {
            if (mode == WwrEstimator::duplicate_count)
                return (nd - 1.0) / kd;
            double miss = std::pow(1.0 - 1.0 / nd, kd);
            return miss == 0.0 ? 0.0 : miss / (1.0 - miss);
        }
        case SchemeTag::pri:
            if (k == 1)
                return std::nullopt;  // unbounded, not a number
            return (nd - kd) / (kd - 1.0);
    }
    throw std::logic_error("unit_item_variance: unhandled scheme");
}

double pair_inversion_probability(double w_small, double w_large) {
    if (!(w_small > 0.0) || w_small > w_large)
        throw std::invalid_argument("pair_inversion_probability: need 0 < w_small <= w_large");
    return w_small / (2.0 * w_large);
}

double solve_fixed_threshold(std::span<const double> weights, std::size_t k) {
    std::vector<double> positive;
    positive.reserve(weights.size());
    for (double w : weights) {
        if (w < 0.0)
            throw std::invalid_argument("solve_fixed_threshold: negative weight");
        if (w > 0.0)
            positive.push_back(w);
    }
    if (k >= positive.size())
        return 0.0;
    std::sort(positive.begin(), positive.end(), std::greater<>());
    // With the c largest items kept outright, tau = (remaining weight)/(k-c)
    // solves the size equation; valid once tau lands between neighbors.
    double suffix = std::accumulate(positive.begin(), positive.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double tau = suffix / static_cast<double>(k - c);
        // Tolerant bounds: at an exact tie either bracket solves the equation.
        bool below_upper = c == 0 || tau <= positive[c - 1] * (1.0 + 1e-12);
        if (below_upper && tau >= positive[c] * (1.0 - 1e-12))
            return tau;
        suffix -= positive[c];
    }
    throw std::logic_error("solve_fixed_threshold: no consistent threshold");
}

// --- exact oracle ---------------------------------------------------------------

namespace {

// Weight estimate of `target` (and optionally `other`) for one alpha vector.
struct TrialEstimates {
    double target = 0.0;
    double other = 0.0;
};

TrialEstimates evaluate_trial(std::span<const double> weights, std::size_t k,
                              std::size_t target, std::size_t other,
                              const double* alphas) {
    const std::size_t n = std::min<std::size_t>(weights.size(), 4);
    double q[4];
    std::size_t order[4];
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = weights[i] == 0.0 ? 0.0 : weights[i] / alphas[i];
        order[i] = i;
    }
    TrialEstimates out;
    if (k >= n) {
        out.target = weights[target];
        out.other = other < n ? weights[other] : 0.0;
        return out;
    }
    std::sort(order, order + n, [&](std::size_t a, std::size_t b) {
        return higher_priority(q[a], a, q[b], b);
    });
    double tau = q[order[k]];
    auto estimate = [&](std::size_t item) {
        for (std::size_t rank = 0; rank < k; ++rank) {
            if (order[rank] == item)
                return std::max(weights[item], tau);
        }
        return 0.0;
    };
    out.target = estimate(target);
    if (other < n)
        out.other = estimate(other);
    return out;
}

double statistic_value(OracleStatistic stat, const TrialEstimates& est) {
    switch (stat) {
        case OracleStatistic::mean: return est.target;
        case OracleStatistic::second_moment: return est.target * est.target;
        case OracleStatistic::product_mean: return est.target * est.other;
    }
    return 0.0;
}

OracleResult oracle_grid(std::span<const double> weights, std::size_t k, std::size_t target,
                         OracleStatistic stat, std::size_t other, const OracleOptions& options) {
    const std::size_t n = weights.size();
    const std::size_t m = options.grid_resolution;
    if (m < 2)
        throw std::invalid_argument("exact_oracle: grid resolution too small");
    double sum = 0.0;
    double alphas[4] = {0.5, 0.5, 0.5, 0.5};
    std::size_t idx[4] = {0, 0, 0, 0};
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i)
        cells *= m;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rest = cell;
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = rest % m;
            rest /= m;
            alphas[i] = (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(m);
        }
        sum += statistic_value(stat, evaluate_trial(weights, k, target, other, alphas));
    }
    OracleResult result;
    result.value = sum / static_cast<double>(cells);
    result.std_error = 0.0;
    std::ostringstream label;
    label << "grid(resolution=" << m << ")";
    result.method = label.str();
    return result;
}

OracleResult oracle_monte_carlo(std::span<const double> weights, std::size_t k,
                                std::size_t target, OracleStatistic stat, std::size_t other,
                                const OracleOptions& options) {
    const std::size_t n = weights.size();
    struct Sums {
        double value = 0.0;
        double square = 0.0;
    };
    std::vector<double> w(weights.begin(), weights.end());
    auto blocks = run_trial_blocks<Sums>(
        options.trials, options.seed, [&, w](const TrialBlock& block) {
            SeededGenerator gen(block.seed);
            Sums sums;
            double alphas[4] = {0.5, 0.5, 0.5, 0.5};
            for (std::size_t t = 0; t < block.trials; ++t) {
                for (std::size_t i = 0; i < n; ++i)
                    alphas[i] = gen.next_alpha();
                double v = statistic_value(stat, evaluate_trial(w, k, target, other, alphas));
                sums.value += v;
                sums.square += v * v;
            }
            return sums;
        });
    Sums total;
    for (const Sums& s : blocks) {
        total.value += s.value;
        total.square += s.square;
    }
    double trials = static_cast<double>(options.trials);
    OracleResult result;
    result.value = total.value / trials;
    double variance = std::max(0.0, total.square / trials - result.value * result.value);
    result.std_error = std::sqrt(variance / trials);
    std::ostringstream label;
    label << "monte-carlo(trials=" << options.trials << ")";
    result.method = label.str();
    return result;
}

}  // namespace

OracleResult exact_oracle(std::span<const double> weights, std::size_t k, std::size_t target,
                          OracleStatistic stat, std::size_t other, const OracleOptions& options) {
    const std::size_t n = weights.size();
    if (n < 1 || n > 4)
        throw std::invalid_argument("exact_oracle: brute force only, need 1 <= n <= 4");
    if (target >= n)
        throw std::invalid_argument("exact_oracle: target out of range");
    if (stat == OracleStatistic::product_mean) {
        if (other >= n || other == target)
            throw std::invalid_argument("exact_oracle: product statistic needs a distinct second item");
    }
    for (double w : weights) {
        if (w < 0.0)
            throw std::invalid_argument("exact_oracle: negative weight");
    }
    if (options.method == OracleMethod::grid) {
        if (n > 3)
            throw std::invalid_argument("exact_oracle: grid rule supports n <= 3");
        return oracle_grid(weights, k, target, stat, other, options);
    }
    return oracle_monte_carlo(weights, k, target, stat, other, options);
}

// --- conjectured ordering --------------------------------------------------------

ConjectureComparison conjecture_compare(std::span<const double> weights, std::size_t k,
                                        std::size_t trials, std::uint64_t seed) {
    const std::size_t n = weights.size();
    if (k + 1 > n)
        throw std::invalid_argument("conjecture_compare: need k+1 <= n");
    ConjectureComparison out;
    out.n = n;
    out.k = k;
    out.trials = trials;
    out.thr_threshold = solve_fixed_threshold(weights, k);
    for (double w : weights)
        out.thr_total_variance += fixed_threshold_item_variance(w, out.thr_threshold);

    const std::size_t k_pri = k + 1;
    if (k_pri >= n) {
        // Priority sampling retains the whole stream: zero variance.
        out.pri_total_variance = 0.0;
        out.pri_std_error = 0.0;
        out.method = "closed-form";
    } else if (n <= 4) {
        OracleOptions opts;
        opts.trials = trials;
        double se_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            opts.seed = derive_seed(seed, i);
            OracleResult m2 = exact_oracle(weights, k_pri, i, OracleStatistic::second_moment,
                                           std::numeric_limits<std::size_t>::max(), opts);
            out.pri_total_variance += m2.value - weights[i] * weights[i];
            se_sq += m2.std_error * m2.std_error;
        }
        out.pri_std_error = std::sqrt(se_sq);
        out.method = "exact-oracle";
    } else {
        // Per trial, sum of squared estimates over the sample; its mean minus
        // sum(w^2) estimates the total variance (estimates are unbiased).
        struct Sums {
            double value = 0.0;
            double square = 0.0;
        };
        std::vector<double> w(weights.begin(), weights.end());
        auto blocks = run_trial_blocks<Sums>(trials, seed, [&, w](const TrialBlock& block) {
            SeededGenerator gen(block.seed);
            PriorityReservoir reservoir(k_pri);
            Sums sums;
            for (std::size_t t = 0; t < block.trials; ++t) {
                reservoir.clear();
                for (std::size_t i = 0; i < w.size(); ++i) {
                    ItemRecord item;
                    item.id = i;
                    item.weight = w[i];
                    reservoir.insert(prioritize(std::move(item), gen.next_alpha()));
                }
                PrioritySample sample = reservoir.finalize();
                double square_sum = 0.0;
                for (const auto& entry : sample.entries) {
                    double est = std::max(entry.weight(), sample.threshold);
                    square_sum += est * est;
                }
                sums.value += square_sum;
                sums.square += square_sum * square_sum;
            }
            return sums;
        });
        Sums total;
        for (const Sums& s : blocks) {
            total.value += s.value;
            total.square += s.square;
        }
        double t = static_cast<double>(trials);
        double mean = total.value / t;
        double variance = std::max(0.0, total.square / t - mean * mean);
        double weight_square_sum = 0.0;
        for (double wi : w)
            weight_square_sum += wi * wi;
        out.pri_total_variance = mean - weight_square_sum;
        out.pri_std_error = std::sqrt(variance / t);
        out.method = "monte-carlo";
    }
    out.ordering_observed =
        out.pri_total_variance <= out.thr_total_variance + 3.0 * out.pri_std_error;
    return out;
}

}  // namespace priosample
