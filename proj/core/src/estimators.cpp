#include "priosample/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace priosample {

namespace {

const PrioritizedItem* find_entry(const std::vector<PrioritizedItem>& entries, std::uint64_t id) {
    auto it = std::lower_bound(entries.begin(), entries.end(), id,
                               [](const PrioritizedItem& e, std::uint64_t v) { return e.id() < v; });
    if (it == entries.end() || it->id() != id)
        return nullptr;
    return &*it;
}

const ItemRecord* find_record(const std::vector<ItemRecord>& entries, std::uint64_t id) {
    auto it = std::lower_bound(entries.begin(), entries.end(), id,
                               [](const ItemRecord& e, std::uint64_t v) { return e.id < v; });
    if (it == entries.end() || it->id != id)
        return nullptr;
    return &*it;
}

}  // namespace

double pri_weight_estimate(const PrioritySample& sample, std::uint64_t id) {
    const PrioritizedItem* entry = find_entry(sample.entries, id);
    return entry ? std::max(entry->weight(), sample.threshold) : 0.0;
}

double pri_variance_estimate(const PrioritySample& sample, std::uint64_t id) {
    const PrioritizedItem* entry = find_entry(sample.entries, id);
    if (!entry)
        return 0.0;
    return sample.threshold * std::max(0.0, sample.threshold - entry->weight());
}

double secondary_estimate(const PrioritySample& sample, std::uint64_t id) {
    const PrioritizedItem* entry = find_entry(sample.entries, id);
    if (!entry || !entry->item.secondary)
        return 0.0;
    if (entry->weight() == 0.0)
        throw std::domain_error(
            "secondary_estimate: zero-weight item carries a secondary value; "
            "sample with weight=|secondary| instead");
    return std::max(1.0, sample.threshold / entry->weight()) * *entry->item.secondary;
}

double thr_weight_estimate(const ThresholdSample& sample, std::uint64_t id) {
    const PrioritizedItem* entry = find_entry(sample.entries, id);
    return entry ? std::max(entry->weight(), sample.threshold) : 0.0;
}

double thr_variance_estimate(const ThresholdSample& sample, std::uint64_t id) {
    const PrioritizedItem* entry = find_entry(sample.entries, id);
    if (!entry)
        return 0.0;
    return sample.threshold * std::max(0.0, sample.threshold - entry->weight());
}

double uwr_weight_estimate(const UniformSample& sample, std::uint64_t id) {
    const ItemRecord* entry = find_record(sample.entries, id);
    if (!entry)
        return 0.0;
    double ratio = sample.k > 0 ? static_cast<double>(sample.items_seen) / sample.k : 0.0;
    return entry->weight * std::max(1.0, ratio);
}

double uwr_variance_estimate(const UniformSample& sample, std::uint64_t id) {
    const ItemRecord* entry = find_record(sample.entries, id);
    if (!entry || sample.k == 0)
        return 0.0;
    double p = std::min(1.0, static_cast<double>(sample.k) / sample.items_seen);
    return entry->weight * entry->weight * (1.0 - p) / (p * p);
}

double wwr_presence_probability(double weight, double total_weight, std::size_t k) {
    if (weight <= 0.0 || total_weight <= 0.0)
        return 0.0;
    double share = weight / total_weight;
    if (share >= 1.0)
        return 1.0;
    return -std::expm1(static_cast<double>(k) * std::log1p(-share));
}

namespace {

std::size_t slot_count(const WeightedSample& sample, std::uint64_t id) {
    return static_cast<std::size_t>(
        std::count_if(sample.slot_items.begin(), sample.slot_items.end(),
                      [id](const ItemRecord& r) { return r.id == id; }));
}

const ItemRecord* slot_record(const WeightedSample& sample, std::uint64_t id) {
    auto it = std::lower_bound(sample.slot_items.begin(), sample.slot_items.end(), id,
                               [](const ItemRecord& e, std::uint64_t v) { return e.id < v; });
    if (it == sample.slot_items.end() || it->id != id)
        return nullptr;
    return &*it;
}

}  // namespace

double wwr_weight_estimate(const WeightedSample& sample, std::uint64_t id, WwrEstimator mode) {
    const ItemRecord* entry = slot_record(sample, id);
    if (!entry || sample.k == 0)
        return 0.0;
    if (mode == WwrEstimator::duplicate_count) {
        return static_cast<double>(slot_count(sample, id)) * sample.total_weight / sample.k;
    }
    double p = wwr_presence_probability(entry->weight, sample.total_weight, sample.k);
    return p > 0.0 ? entry->weight / p : 0.0;
}

double wwr_variance_estimate(const WeightedSample& sample, std::uint64_t id, WwrEstimator mode) {
    const ItemRecord* entry = slot_record(sample, id);
    if (!entry || sample.k == 0)
        return 0.0;
    double w = entry->weight;
    double p = wwr_presence_probability(w, sample.total_weight, sample.k);
    if (p <= 0.0)
        return 0.0;
    if (mode == WwrEstimator::duplicate_count) {
        // Var of the count estimator is w(W-w)/k exactly; scale by the
        // presence probability so the sampled contributions stay unbiased.
        return w * (sample.total_weight - w) / (static_cast<double>(sample.k) * p);
    }
    return w * w * (1.0 - p) / (p * p);
}

}  // namespace priosample
