#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "priosample/estimators.hpp"
#include "priosample/scheme.hpp"
#include "priosample/trace.hpp"

namespace priosample {

/// One subset-sum estimate from one replicate of one scheme at one sample
/// size; rel_error = (estimate - truth)/truth with positive truth.
struct ComparisonRow {
    SchemeTag scheme = SchemeTag::pri;
    std::size_t k = 0;
    std::size_t replicate = 0;
    std::string subset;
    double truth = 0.0;
    double estimate = 0.0;
    double rel_error = 0.0;
};

/// Distinct sampled items as a percentage of the target k.
struct DistinctCountRow {
    SchemeTag scheme = SchemeTag::pri;
    std::size_t k = 0;
    std::size_t replicate = 0;
    std::size_t distinct = 0;
    double pct_of_target = 0.0;
};

/// Traffic-matrix aggregate: sum over all entries of |estimate - truth|
/// divided by the total traffic.
struct MatrixErrorRow {
    SchemeTag scheme = SchemeTag::pri;
    std::size_t k = 0;
    std::size_t replicate = 0;
    double aggregate_error = 0.0;
};

struct LabeledPredicate {
    std::string label;
    SubsetPredicate predicate;
};

struct ComparisonSpec {
    std::vector<SchemeTag> schemes{SchemeTag::pri, SchemeTag::thr, SchemeTag::uwr, SchemeTag::wwr};
    std::vector<std::size_t> k_grid;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    std::vector<LabeledPredicate> subsets;
    /// Also estimate the 8x8 interface matrix (requires matrix attributes).
    bool matrix = false;
    WwrEstimator wwr_mode = WwrEstimator::presence;
};

struct ComparisonResult {
    std::vector<ComparisonRow> rows;
    std::vector<DistinctCountRow> distinct;
    std::vector<MatrixErrorRow> matrix;
};

/// Runs every (scheme, k, replicate) combination over the trace. Each
/// replicate draws one fresh priority sequence shared by the priority and
/// threshold schemes at every k, so at equal k the two samples differ only in
/// the choice of threshold. Uniform and with-replacement schemes draw their
/// own substreams. Replicates run in parallel with a fixed merge order.
ComparisonResult run_comparison(const Trace& trace, const ComparisonSpec& spec);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_distinct_csv(std::ostream& out, const std::vector<DistinctCountRow>& rows);
void write_matrix_csv(std::ostream& out, const std::vector<MatrixErrorRow>& rows);

}  // namespace priosample
