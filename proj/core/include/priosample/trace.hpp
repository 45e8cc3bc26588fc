#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "priosample/item.hpp"
#include "priosample/rng.hpp"

namespace priosample {

/// n items of weight 1.
struct UnitLaw {
    std::size_t n = 0;
};

/// Unbounded Pareto tail: weight = scale * u^(-1/shape).
struct ParetoLaw {
    std::size_t n = 0;
    double shape = 1.1;
    double scale = 1.0;
};

/// large_count items of weight large_weight followed by small_count units.
struct LargeSmallLaw {
    std::size_t large_count = 0;
    double large_weight = 0.0;
    std::size_t small_count = 0;
};

/// One application label of a mixture: a fraction of the flows carrying a
/// share of the bytes, sized by a truncated Pareto between lo and hi. An
/// optional planted fraction concentrates that much of the label's bytes in
/// its single first flow (the dominant-flow regime).
struct MixLabel {
    std::string name;
    double flow_fraction = 0.0;
    double byte_share = 0.0;
    double lo = 1.0;
    double hi = 1e6;
    double shape = 1.1;
    double planted_fraction = 0.0;
};

/// Labeled mixture over n flows; per-label byte totals are scaled to the
/// requested shares exactly, flow counts to the requested fractions.
struct MixLaw {
    std::size_t n = 0;
    double total_bytes = 4e9;
    std::vector<MixLabel> labels;
};

struct TraceSpec {
    std::variant<UnitLaw, ParetoLaw, LargeSmallLaw, MixLaw> law;
    std::uint64_t seed = 0;
    /// Attach uniform "in"/"out" interface labels 0..7 to every item.
    bool matrix_attributes = false;
};

/// Built-in heavy-tailed application mix resembling gateway router traffic:
/// an ftp-like label holding ~80% of the bytes in under 1% of the flows (its
/// dominant flow alone carries ~99% of the label), plus web-, dns-like and
/// residual labels.
TraceSpec gateway_mix_spec(std::size_t n, std::uint64_t seed);

/// Parse the compact trace grammar used by the command line:
///   unit:n=100
///   pareto:n=1000,shape=1.1,scale=1
///   large-small:l=3,N=1e6,n=1000
///   gateway:n=10000
///   mix:n=10000;ftp:prop=.0085,share=.796,lo=40,hi=3.4e9,shape=1.1,planted=.9935;...
/// An optional ",seed=..." on the first segment seeds the generator.
TraceSpec parse_trace_spec(const std::string& text);

struct LabelStat {
    std::size_t flows = 0;
    double bytes = 0.0;
};

struct TraceSummary {
    double total_weight = 0.0;
    std::map<std::string, LabelStat> labels;  // keyed by the "app" attribute
};

struct Trace {
    std::vector<ItemRecord> items;
    TraceSummary summary;
};

/// Deterministic expansion of a spec into a stream of records (ids in
/// arrival order) plus per-label totals.
Trace generate_trace(const TraceSpec& spec);

}  // namespace priosample
