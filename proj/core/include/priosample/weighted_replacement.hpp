#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/rng.hpp"
#include "priosample/samples.hpp"

namespace priosample {

/// Weighted sampling with replacement, reservoir form: when item n arrives,
/// each of the k slots is independently replaced with probability
/// w_n/(W + w_n), leaving every slot holding item i with probability w_i/W.
/// Theta(k) work per item; the slots may contain duplicates. Slots stay empty
/// until positive weight arrives (the first positive item claims them all).
class WeightedReplacementSampler {
public:
    explicit WeightedReplacementSampler(std::size_t k) : k_(k), slots_(k) {}

    void insert(const ItemRecord& item, SeededGenerator& gen) {
        ++items_seen_;
        const double w = item.weight;
        const double denom = total_weight_ + w;
        const double p = denom > 0.0 ? w / denom : 0.0;
        for (auto& slot : slots_) {
            if (gen.next_alpha() <= p)
                slot = item;
        }
        total_weight_ += w;
    }

    WeightedSample finalize() const {
        WeightedSample out;
        out.k = k_;
        out.items_seen = items_seen_;
        out.total_weight = total_weight_;
        for (const auto& slot : slots_) {
            if (slot)
                out.slot_items.push_back(*slot);
        }
        std::sort(out.slot_items.begin(), out.slot_items.end(),
                  [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });
        return out;
    }

    std::size_t capacity() const { return k_; }
    std::uint64_t items_seen() const { return items_seen_; }
    double total_weight() const { return total_weight_; }

private:
    std::size_t k_;
    std::uint64_t items_seen_ = 0;
    double total_weight_ = 0.0;
    std::vector<std::optional<ItemRecord>> slots_;
};

}  // namespace priosample
