#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/samples.hpp"

namespace priosample {

namespace detail {

struct higher_priority_order {
    bool operator()(const PrioritizedItem& a, const PrioritizedItem& b) const {
        return higher_priority(a, b);
    }
};

/// Build a PrioritySample from any superset of the true top-(k+1) items.
/// Selection respects the full (priority, id) tie order, so the result is
/// identical to what an exact reservoir produces on the same stream.
inline PrioritySample finalize_superset(std::vector<PrioritizedItem> pool, std::size_t k,
                                        std::uint64_t items_seen) {
    PrioritySample out;
    out.k = k;
    out.items_seen = items_seen;
    if (items_seen > k && pool.size() > k) {
        std::nth_element(pool.begin(), pool.begin() + k, pool.end(), higher_priority_order{});
        out.threshold = pool[k].priority;
        pool.resize(k);
    }
    out.entries = std::move(pool);
    std::sort(out.entries.begin(), out.entries.end(),
              [](const PrioritizedItem& a, const PrioritizedItem& b) { return a.id() < b.id(); });
    return out;
}

}  // namespace detail

/// Relaxed priority reservoir: appends into a buffer of capacity 2k+2 and,
/// whenever the buffer fills, selects the top k+1 items in linear time and
/// discards the rest. One cleanup per k+1 arrivals, so constant amortized
/// work per item independent of k.
class RelaxedBuffer {
public:
    explicit RelaxedBuffer(std::size_t k) : k_(k), capacity_(2 * k + 2) { buffer_.reserve(capacity_); }

    void insert(PrioritizedItem pitem) {
        ++items_seen_;
        buffer_.push_back(std::move(pitem));
        if (buffer_.size() == capacity_)
            cleanup();
    }

    PrioritySample finalize() const { return detail::finalize_superset(buffer_, k_, items_seen_); }

    const std::vector<PrioritizedItem>& contents() const { return buffer_; }
    std::size_t capacity() const { return k_; }
    std::uint64_t items_seen() const { return items_seen_; }
    std::size_t cleanup_count() const { return cleanups_; }
    std::uint64_t comparisons() const { return comparisons_; }

private:
    void cleanup() {
        // Keep exactly the k+1 highest-priority items; everything below the
        // partition point is beaten by k+1 buffered items and can never
        // reenter the sample.
        std::nth_element(buffer_.begin(), buffer_.begin() + k_, buffer_.end(),
                         [this](const PrioritizedItem& a, const PrioritizedItem& b) {
                             ++comparisons_;
                             return higher_priority(a, b);
                         });
        partition_threshold_ = buffer_[k_].priority;
        buffer_.resize(k_ + 1);
        ++cleanups_;
    }

    std::size_t k_;
    std::size_t capacity_;
    std::uint64_t items_seen_ = 0;
    std::size_t cleanups_ = 0;
    std::uint64_t comparisons_ = 0;
    double partition_threshold_ = 0.0;
    std::vector<PrioritizedItem> buffer_;
};

/// Merge two relaxed buffers fed from the same stream and finalize the union,
/// as when one buffer collects while the other is being cleaned. The result
/// equals the single-reservoir sample over everything both buffers saw.
inline PrioritySample relaxed_dual_finalize(const RelaxedBuffer& a, const RelaxedBuffer& b) {
    std::vector<PrioritizedItem> pool = a.contents();
    pool.insert(pool.end(), b.contents().begin(), b.contents().end());
    return detail::finalize_superset(std::move(pool), a.capacity(),
                                     a.items_seen() + b.items_seen());
}

/// Two-buffer variant: arrivals go to the collecting buffer while the twin,
/// just cleaned to k+1 items, waits its turn. Per-item work stays constant
/// even at the moment a cleanup is due.
class DualRelaxedBuffer {
public:
    explicit DualRelaxedBuffer(std::size_t k) : buffers_{RelaxedBuffer(k), RelaxedBuffer(k)} {}

    void insert(PrioritizedItem pitem) {
        RelaxedBuffer& target = buffers_[active_];
        std::size_t before = target.cleanup_count();
        target.insert(std::move(pitem));
        if (target.cleanup_count() != before)
            active_ ^= 1;  // cleaned buffer rests; the twin collects
    }

    PrioritySample finalize() const { return relaxed_dual_finalize(buffers_[0], buffers_[1]); }

    const RelaxedBuffer& collecting() const { return buffers_[active_]; }
    const RelaxedBuffer& resting() const { return buffers_[active_ ^ 1]; }
    std::uint64_t items_seen() const { return buffers_[0].items_seen() + buffers_[1].items_seen(); }

private:
    RelaxedBuffer buffers_[2];
    int active_ = 0;
};

}  // namespace priosample
