#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/rng.hpp"
#include "priosample/samples.hpp"

namespace priosample {

/// Classic uniform reservoir (algorithm R): after n arrivals every item seen
/// occupies a slot with probability min(1, k/n). Constant time per item.
class UniformReservoir {
public:
    explicit UniformReservoir(std::size_t k) : k_(k) { slots_.reserve(k); }

    void insert(const ItemRecord& item, SeededGenerator& gen) {
        if (k_ == 0) {
            ++items_seen_;
            return;
        }
        if (items_seen_ < k_) {
            slots_.push_back(item);
        } else {
            std::uint64_t j = gen.next_below(items_seen_ + 1);
            if (j < k_)
                slots_[j] = item;
        }
        ++items_seen_;
    }

    UniformSample finalize() const {
        UniformSample out{k_, slots_, items_seen_};
        std::sort(out.entries.begin(), out.entries.end(),
                  [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });
        return out;
    }

    std::size_t capacity() const { return k_; }
    std::uint64_t items_seen() const { return items_seen_; }
    std::size_t size() const { return slots_.size(); }

private:
    std::size_t k_;
    std::uint64_t items_seen_ = 0;
    std::vector<ItemRecord> slots_;
};

}  // namespace priosample
