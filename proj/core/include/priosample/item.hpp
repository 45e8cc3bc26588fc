#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace priosample {

/// One element of a weighted stream. The attribute map carries whatever
/// descriptive fields arrive with the record; selections are applied to it
/// after sampling, so keys irrelevant today can still be queried later.
/// `secondary` is an optional associated value (may be negative) estimated
/// through the weight estimate.
struct ItemRecord {
    std::uint64_t id = 0;
    double weight = 0.0;
    std::map<std::string, std::string> attributes;
    std::optional<double> secondary;
};

/// Item plus its randomization: alpha drawn uniformly from (0,1) and the
/// priority weight/alpha. Zero-weight items get priority zero.
struct PrioritizedItem {
    ItemRecord item;
    double alpha = 0.0;
    double priority = 0.0;

    std::uint64_t id() const { return item.id; }
    double weight() const { return item.weight; }
};

inline PrioritizedItem prioritize(ItemRecord item, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("prioritize: alpha must lie strictly in (0,1)");
    if (item.weight < 0.0)
        throw std::invalid_argument("prioritize: weight must be nonnegative");
    double priority = item.weight == 0.0 ? 0.0 : item.weight / alpha;
    return PrioritizedItem{std::move(item), alpha, priority};
}

/// Strict total order on (priority, id): larger priority wins, equal
/// priorities resolve in favor of the earlier item. Overflowed priorities
/// (+inf) sort above all finite ones and are still tie-broken by id.
inline bool higher_priority(double qa, std::uint64_t ida, double qb, std::uint64_t idb) {
    if (qa != qb)
        return qa > qb;
    return ida < idb;
}

inline bool higher_priority(const PrioritizedItem& a, const PrioritizedItem& b) {
    return higher_priority(a.priority, a.id(), b.priority, b.id());
}

}  // namespace priosample
