#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/samples.hpp"

namespace priosample {

/// Streaming reservoir for priority sampling. Maintains the k+1 items of
/// highest priority in a comparison heap; the heap minimum of a full
/// reservoir is the running threshold candidate. O(log k) per item.
class PriorityReservoir {
public:
    explicit PriorityReservoir(std::size_t k) : k_(k) { heap_.reserve(k + 2); }

    void insert(PrioritizedItem pitem) {
        // Heap comparator placing the lowest-priority item at the front.
        auto lowest_first = [this](const PrioritizedItem& a, const PrioritizedItem& b) {
            ++comparisons_;
            return higher_priority(a, b);
        };
        ++items_seen_;
        heap_.push_back(std::move(pitem));
        std::push_heap(heap_.begin(), heap_.end(), lowest_first);
        if (heap_.size() > k_ + 1) {
            std::pop_heap(heap_.begin(), heap_.end(), lowest_first);
            heap_.pop_back();
        }
    }

    /// Snapshot of the sample: entries in id order. With more than k items
    /// seen, the heap minimum becomes the threshold and the other k items the
    /// sample; otherwise everything is retained with threshold 0.
    PrioritySample finalize() const {
        PrioritySample out;
        out.k = k_;
        out.items_seen = items_seen_;
        out.entries = heap_;
        if (items_seen_ > k_ && !out.entries.empty()) {
            // The heap front is the (k+1)-th highest priority seen.
            out.threshold = out.entries.front().priority;
            out.entries.front() = std::move(out.entries.back());
            out.entries.pop_back();
        }
        std::sort(out.entries.begin(), out.entries.end(),
                  [](const PrioritizedItem& a, const PrioritizedItem& b) { return a.id() < b.id(); });
        return out;
    }

    std::size_t capacity() const { return k_; }
    std::uint64_t items_seen() const { return items_seen_; }
    std::size_t size() const { return heap_.size(); }
    std::uint64_t comparisons() const { return comparisons_; }

    /// Reuse the reservoir for a fresh stream without reallocating.
    void clear() {
        heap_.clear();
        items_seen_ = 0;
    }

private:
    std::size_t k_;
    std::uint64_t items_seen_ = 0;
    std::uint64_t comparisons_ = 0;
    std::vector<PrioritizedItem> heap_;
};

}  // namespace priosample
