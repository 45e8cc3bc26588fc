#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/samples.hpp"
#include "priosample/scheme.hpp"

namespace priosample {

/// Serializable subset selection: a conjunction of attribute equalities plus
/// an optional inclusive weight range. Pure function of the record; arbitrary
/// callables can be used instead at the library layer.
struct SubsetPredicate {
    std::vector<std::pair<std::string, std::string>> attribute_equals;
    std::optional<double> weight_min;
    std::optional<double> weight_max;

    bool matches(const ItemRecord& item) const {
        for (const auto& [key, value] : attribute_equals) {
            auto it = item.attributes.find(key);
            if (it == item.attributes.end() || it->second != value)
                return false;
        }
        if (weight_min && item.weight < *weight_min)
            return false;
        if (weight_max && item.weight > *weight_max)
            return false;
        return true;
    }

    bool operator()(const ItemRecord& item) const { return matches(item); }
};

struct Contribution {
    std::uint64_t id = 0;
    double weight_estimate = 0.0;
    double variance_estimate = 0.0;
};

/// Subset-sum estimate with its variance estimate and the sampled items that
/// produced it, so a query result can be audited record by record.
struct EstimateReport {
    SchemeTag scheme = SchemeTag::pri;
    std::size_t k = 0;
    std::uint64_t items_seen = 0;
    double estimate = 0.0;
    double variance_estimate = 0.0;
    /// Set for single-sample priority estimates, whose true variance is
    /// unbounded; the formula value is reported but should not be trusted.
    bool variance_unreliable = false;
    std::vector<Contribution> contributions;
};

// --- priority sampling ------------------------------------------------------

/// max{w, tau} for sampled items, 0 otherwise (unknown ids are unsampled).
double pri_weight_estimate(const PrioritySample& sample, std::uint64_t id);

/// Per-item variance estimator tau*max{0, tau-w} for sampled items. Its mean
/// equals Var[weight estimate] for k >= 2; summed over a subset it estimates
/// the subset-sum variance because distinct estimates have zero covariance.
double pri_variance_estimate(const PrioritySample& sample, std::uint64_t id);

/// Estimate of the item's secondary value: max{1, tau/w} * x if sampled.
/// Rejects sampled zero-weight items carrying a secondary value (the
/// transform divides by w; weight by |x| instead).
double secondary_estimate(const PrioritySample& sample, std::uint64_t id);

// --- threshold sampling -----------------------------------------------------

double thr_weight_estimate(const ThresholdSample& sample, std::uint64_t id);
double thr_variance_estimate(const ThresholdSample& sample, std::uint64_t id);

// --- uniform without replacement --------------------------------------------

/// w * max{1, n/k} for sampled items (inclusion probability min{1, k/n}).
double uwr_weight_estimate(const UniformSample& sample, std::uint64_t id);
double uwr_variance_estimate(const UniformSample& sample, std::uint64_t id);

// --- weighted with replacement ----------------------------------------------

/// Presence mode: w / (1-(1-w/W)^k) when the item holds at least one slot.
/// Duplicate-count mode: (#slots holding the item) * W/k.
double wwr_weight_estimate(const WeightedSample& sample, std::uint64_t id,
                           WwrEstimator mode = WwrEstimator::presence);
double wwr_variance_estimate(const WeightedSample& sample, std::uint64_t id,
                             WwrEstimator mode = WwrEstimator::presence);

/// Probability that an item of weight w holds at least one of k slots.
double wwr_presence_probability(double weight, double total_weight, std::size_t k);

// --- subset sums -------------------------------------------------------------

namespace detail {

template <typename Pred>
EstimateReport accumulate_report(SchemeTag scheme, std::size_t k, std::uint64_t items_seen,
                                 Pred&& pred, const std::vector<Contribution>& candidates,
                                 const std::vector<const ItemRecord*>& records) {
    EstimateReport report;
    report.scheme = scheme;
    report.k = k;
    report.items_seen = items_seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!pred(*records[i]))
            continue;
        report.contributions.push_back(candidates[i]);
        report.estimate += candidates[i].weight_estimate;
        report.variance_estimate += candidates[i].variance_estimate;
    }
    return report;
}

}  // namespace detail

template <typename Pred>
EstimateReport subset_estimate(const PrioritySample& sample, Pred&& pred) {
    std::vector<Contribution> candidates;
    std::vector<const ItemRecord*> records;
    candidates.reserve(sample.entries.size());
    records.reserve(sample.entries.size());
    for (const auto& entry : sample.entries) {
        candidates.push_back({entry.id(), pri_weight_estimate(sample, entry.id()),
                              pri_variance_estimate(sample, entry.id())});
        records.push_back(&entry.item);
    }
    auto report = detail::accumulate_report(SchemeTag::pri, sample.k, sample.items_seen,
                                            std::forward<Pred>(pred), candidates, records);
    report.variance_unreliable = sample.k == 1 && sample.items_seen > sample.k;
    return report;
}

template <typename Pred>
EstimateReport subset_estimate(const ThresholdSample& sample, Pred&& pred) {
    std::vector<Contribution> candidates;
    std::vector<const ItemRecord*> records;
    for (const auto& entry : sample.entries) {
        candidates.push_back({entry.id(), thr_weight_estimate(sample, entry.id()),
                              thr_variance_estimate(sample, entry.id())});
        records.push_back(&entry.item);
    }
    return detail::accumulate_report(SchemeTag::thr, sample.k, sample.items_seen,
                                     std::forward<Pred>(pred), candidates, records);
}

template <typename Pred>
EstimateReport subset_estimate(const UniformSample& sample, Pred&& pred) {
    std::vector<Contribution> candidates;
    std::vector<const ItemRecord*> records;
    for (const auto& entry : sample.entries) {
        candidates.push_back({entry.id, uwr_weight_estimate(sample, entry.id),
                              uwr_variance_estimate(sample, entry.id)});
        records.push_back(&entry);
    }
    return detail::accumulate_report(SchemeTag::uwr, sample.k, sample.items_seen,
                                     std::forward<Pred>(pred), candidates, records);
}

template <typename Pred>
EstimateReport subset_estimate(const WeightedSample& sample, Pred&& pred,
                               WwrEstimator mode = WwrEstimator::presence) {
    // Deduplicate: each distinct sampled item contributes once.
    std::vector<Contribution> candidates;
    std::vector<const ItemRecord*> records;
    std::map<std::uint64_t, const ItemRecord*> distinct;
    for (const auto& entry : sample.slot_items)
        distinct.emplace(entry.id, &entry);
    for (const auto& [id, record] : distinct) {
        candidates.push_back({id, wwr_weight_estimate(sample, id, mode),
                              wwr_variance_estimate(sample, id, mode)});
        records.push_back(record);
    }
    return detail::accumulate_report(SchemeTag::wwr, sample.k, sample.items_seen,
                                     std::forward<Pred>(pred), candidates, records);
}

}  // namespace priosample
