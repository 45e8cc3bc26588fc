#pragma once

#include <cstdint>
#include <vector>

#include "priosample/item.hpp"

namespace priosample {

/// Finalized priority sample: the k highest-priority items seen, plus the
/// threshold (the (k+1)-th highest priority). When no more than k items were
/// seen the whole stream is retained and the threshold is zero, in which case
/// every weight estimate equals the original weight. Entries are kept in
/// arrival (id) order.
struct PrioritySample {
    std::size_t k = 0;
    std::vector<PrioritizedItem> entries;
    double threshold = 0.0;
    std::uint64_t items_seen = 0;
};

/// Finalized threshold sample: every item whose priority exceeds the running
/// threshold that solves sum(min{1, w_i/threshold}) = k over the stream. The
/// number of entries is random with expectation k.
struct ThresholdSample {
    std::size_t k = 0;
    std::vector<PrioritizedItem> entries;
    double threshold = 0.0;
    std::uint64_t items_seen = 0;
};

/// Finalized uniform (without replacement) reservoir of min(n, k) items.
struct UniformSample {
    std::size_t k = 0;
    std::vector<ItemRecord> entries;
    std::uint64_t items_seen = 0;
};

/// Finalized weighted-with-replacement sample: the k slot contents, possibly
/// containing duplicates, plus the total stream weight the slot probabilities
/// were formed against. slot_items is empty until positive weight arrives.
struct WeightedSample {
    std::size_t k = 0;
    std::vector<ItemRecord> slot_items;
    double total_weight = 0.0;
    std::uint64_t items_seen = 0;
};

}  // namespace priosample
