#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/samples.hpp"

namespace priosample {

/// Reservoir version of threshold sampling. Alongside the sampled items it
/// tracks the set L of items with weight >= threshold (min-extractable by
/// weight) and the total weight U of all smaller items ever seen, so that
/// sum(min{1, w_i/threshold}) = |L| + U/threshold. After each arrival the
/// threshold is raised until that sum equals the target k, then every sampled
/// item whose priority dropped to or below the threshold is evicted.
///
/// While fewer than k positive-weight items have been seen the equation has
/// no positive solution; the threshold stays 0 and everything positive is
/// retained with weight estimate equal to its weight.
class ThresholdReservoir {
public:
    explicit ThresholdReservoir(std::size_t k) : k_(k) {}

    void insert(PrioritizedItem pitem) {
        ++items_seen_;
        const double w = pitem.weight();
        if (w <= 0.0)
            return;  // contributes nothing to the size equation and q=0 never exceeds tau
        ++positive_seen_;
        if (w >= threshold_) {
            large_.emplace_back(w, pitem.id());
            std::push_heap(large_.begin(), large_.end(), by_weight_desc);
        } else {
            below_weight_ += w;
        }
        sample_.push_back(std::move(pitem));
        std::push_heap(sample_.begin(), sample_.end(), by_priority_desc);
        raise_threshold();
        evict();
    }

    ThresholdSample finalize() const {
        ThresholdSample out;
        out.k = k_;
        out.items_seen = items_seen_;
        out.threshold = threshold_;
        out.entries = sample_;
        std::sort(out.entries.begin(), out.entries.end(),
                  [](const PrioritizedItem& a, const PrioritizedItem& b) { return a.id() < b.id(); });
        return out;
    }

    double threshold() const { return threshold_; }
    std::size_t target_size() const { return k_; }
    std::size_t sample_size() const { return sample_.size(); }
    std::uint64_t items_seen() const { return items_seen_; }

    /// Current value of sum(min{1, w_i/threshold}) over everything seen.
    double expected_sample_size() const {
        if (threshold_ <= 0.0)
            return static_cast<double>(positive_seen_);
        return static_cast<double>(large_.size()) + below_weight_ / threshold_;
    }

private:
    static bool by_priority_desc(const PrioritizedItem& a, const PrioritizedItem& b) {
        return higher_priority(a, b);  // heap front = lowest priority
    }
    static bool by_weight_desc(const std::pair<double, std::uint64_t>& a,
                               const std::pair<double, std::uint64_t>& b) {
        return a > b;  // heap front = smallest weight
    }

    void raise_threshold() {
        if (positive_seen_ <= k_)
            return;
        double tau = threshold_;
        while (true) {
            if (large_.size() >= k_) {
                // tau* would divide by a nonpositive count; the smallest
                // member of L must leave first.
                tau = pop_smallest_large();
                continue;
            }
            double tau_star = below_weight_ / static_cast<double>(k_ - large_.size());
            double smallest = large_.empty() ? std::numeric_limits<double>::infinity()
                                             : large_.front().first;
            if (tau_star < smallest) {
                tau = std::max(tau, tau_star);
                break;
            }
            tau = pop_smallest_large();
        }
        if (tau < threshold_ * (1.0 - 1e-12))
            throw std::logic_error("ThresholdReservoir: threshold decreased");
        threshold_ = std::max(threshold_, tau);
    }

    double pop_smallest_large() {
        std::pop_heap(large_.begin(), large_.end(), by_weight_desc);
        double w = large_.back().first;
        large_.pop_back();
        below_weight_ += w;
        return w;
    }

    void evict() {
        while (!sample_.empty() && sample_.front().priority <= threshold_) {
            std::pop_heap(sample_.begin(), sample_.end(), by_priority_desc);
            sample_.pop_back();
        }
    }

    std::size_t k_;
    std::uint64_t items_seen_ = 0;
    std::uint64_t positive_seen_ = 0;
    double threshold_ = 0.0;
    double below_weight_ = 0.0;
    std::vector<PrioritizedItem> sample_;                  // min-heap by (priority, id)
    std::vector<std::pair<double, std::uint64_t>> large_;  // min-heap by (weight, id)
};

}  // namespace priosample
