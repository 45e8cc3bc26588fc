#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "priosample/samples.hpp"
#include "priosample/scheme.hpp"

namespace priosample {

/// On-disk form of a finalized sample (JSON, format_version 1). Reloading and
/// re-querying yields bit-identical estimate reports; doubles are serialized
/// with round-trip precision and keys in sorted order, so identical samples
/// persist to byte-identical files.
struct PersistedSample {
    int format_version = 1;
    SchemeTag scheme = SchemeTag::pri;
    std::uint64_t seed = 0;
    std::variant<PrioritySample, ThresholdSample, UniformSample, WeightedSample> sample;

    std::size_t k() const;
    std::uint64_t items_seen() const;
    std::size_t distinct_items() const;
    double threshold() const;  // 0 for schemes without one
};

void save_sample(std::ostream& out, const PersistedSample& persisted);
PersistedSample load_sample(std::istream& in);

void save_sample_file(const std::string& path, const PersistedSample& persisted);
PersistedSample load_sample_file(const std::string& path);

}  // namespace priosample
