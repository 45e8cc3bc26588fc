#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "priosample/analysis.hpp"

namespace priosample {

double ExactKEvent::inclusion(std::uint32_t item) const {
    if (std::find(forced.begin(), forced.end(), item) != forced.end())
        return 1.0;
    if (pool_take > 0 && std::find(pool.begin(), pool.end(), item) != pool.end())
        return static_cast<double>(pool_take) / static_cast<double>(pool.size());
    return 0.0;
}

double inclusion_probability(std::span<const ExactKEvent> events, std::uint32_t item) {
    double total = 0.0;
    for (const auto& event : events)
        total += event.mass * event.inclusion(item);
    return total;
}

std::vector<ExactKEvent> exactify(const InclusionScheme& scheme) {
    const std::size_t n = scheme.probabilities.size();
    double expected = 0.0;
    for (double p : scheme.probabilities) {
        if (!(p >= -1e-12) || !(p <= 1.0 + 1e-12))
            throw std::invalid_argument("exactify: inclusion probability outside [0,1]");
        expected += p;
    }
    double rounded = std::round(expected);
    if (std::abs(expected - rounded) > 1e-9)
        throw std::invalid_argument("exactify: expected size is not an integer");
    const std::size_t k = static_cast<std::size_t>(rounded);
    if (k != scheme.k)
        throw std::invalid_argument("exactify: expected size does not match k");
    if (k > n)
        throw std::invalid_argument("exactify: k exceeds item count");

    // Residual probabilities of being picked / not picked over the remaining
    // mass; pick + skip = remaining for every item throughout.
    std::vector<double> pick(scheme.probabilities.begin(), scheme.probabilities.end());
    std::vector<double> skip(n);
    for (std::size_t i = 0; i < n; ++i) {
        pick[i] = std::clamp(pick[i], 0.0, 1.0);
        skip[i] = 1.0 - pick[i];
    }
    double remaining = 1.0;
    constexpr double kSnap = 1e-12;

    std::vector<ExactKEvent> events;
    for (std::size_t iteration = 0; iteration <= n; ++iteration) {
        std::vector<std::uint32_t> forced;
        std::vector<std::uint32_t> unsettled;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (pick[i] > 0.0 && skip[i] > 0.0)
                unsettled.push_back(i);
            else if (pick[i] > 0.0)
                forced.push_back(i);
        }

        if (unsettled.empty()) {
            if (remaining > kSnap) {
                if (forced.size() != k)
                    throw std::logic_error("exactify: settled state is not an exactly-k event");
                ExactKEvent event;
                event.mass = remaining;
                event.forced = std::move(forced);
                events.push_back(std::move(event));
            }
            return events;
        }

        if (forced.size() > k)
            throw std::logic_error("exactify: more forced items than k");
        const double pool_size = static_cast<double>(unsettled.size());
        const std::size_t take = k - forced.size();
        const double take_d = static_cast<double>(take);

        // Largest mass keeping every residual nonnegative; at least the
        // minimizing item settles this iteration.
        double mass = remaining;
        for (std::uint32_t i : unsettled) {
            if (take > 0)
                mass = std::min(mass, pick[i] * pool_size / take_d);
            if (take < unsettled.size())
                mass = std::min(mass, skip[i] * pool_size / (pool_size - take_d));
        }
        if (!(mass > 0.0))
            throw std::logic_error("exactify: nonpositive event mass");

        ExactKEvent event;
        event.mass = mass;
        event.forced = forced;
        if (take > 0) {
            event.pool = unsettled;
            event.pool_take = static_cast<std::uint32_t>(take);
        }
        events.push_back(event);

        remaining = std::max(0.0, remaining - mass);
        for (std::uint32_t i : unsettled) {
            pick[i] = std::max(0.0, pick[i] - mass * take_d / pool_size);
            skip[i] = std::max(0.0, skip[i] - mass * (pool_size - take_d) / pool_size);
            if (pick[i] < kSnap)
                pick[i] = 0.0;
            if (skip[i] < kSnap)
                skip[i] = 0.0;
        }
        // Settled items track the remaining mass exactly.
        for (std::uint32_t i : forced) {
            pick[i] = remaining;
            skip[i] = 0.0;
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            if (pick[i] == 0.0)
                skip[i] = remaining;
        }
    }
    throw std::logic_error("exactify: failed to settle within n iterations");
}

std::vector<std::uint32_t> sample_exact_k(std::span<const ExactKEvent> events,
                                          SeededGenerator& gen) {
    if (events.empty())
        return {};
    double total = 0.0;
    for (const auto& event : events)
        total += event.mass;
    double u = gen.next_alpha() * total;
    const ExactKEvent* chosen = &events.back();
    for (const auto& event : events) {
        if (u < event.mass) {
            chosen = &event;
            break;
        }
        u -= event.mass;
    }
    std::vector<std::uint32_t> picked = chosen->forced;
    if (chosen->pool_take > 0) {
        // Partial Fisher-Yates: the first pool_take positions become the draw.
        std::vector<std::uint32_t> pool = chosen->pool;
        for (std::uint32_t j = 0; j < chosen->pool_take; ++j) {
            std::uint64_t pos = j + gen.next_below(pool.size() - j);
            std::swap(pool[j], pool[pos]);
            picked.push_back(pool[j]);
        }
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace priosample
