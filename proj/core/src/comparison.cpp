#include "priosample/comparison.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "priosample/priority_reservoir.hpp"
#include "priosample/rng.hpp"
#include "priosample/threshold_reservoir.hpp"
#include "priosample/uniform_reservoir.hpp"
#include "priosample/weighted_replacement.hpp"

namespace priosample {

namespace {

constexpr std::size_t kMatrixSide = 8;

std::size_t matrix_cell(const ItemRecord& item) {
    auto in = item.attributes.find("in");
    auto out = item.attributes.find("out");
    if (in == item.attributes.end() || out == item.attributes.end())
        return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::stoul(in->second)) * kMatrixSide +
           static_cast<std::size_t>(std::stoul(out->second));
}

template <typename Fn>
void for_each_estimate(const PrioritySample& sample, Fn&& fn) {
    for (const auto& entry : sample.entries)
        fn(entry.item, std::max(entry.weight(), sample.threshold));
}

template <typename Fn>
void for_each_estimate(const ThresholdSample& sample, Fn&& fn) {
    for (const auto& entry : sample.entries)
        fn(entry.item, std::max(entry.weight(), sample.threshold));
}

template <typename Fn>
void for_each_estimate(const UniformSample& sample, Fn&& fn) {
    double ratio = sample.k > 0
                       ? std::max(1.0, static_cast<double>(sample.items_seen) / sample.k)
                       : 0.0;
    for (const auto& entry : sample.entries)
        fn(entry, entry.weight * ratio);
}

template <typename Fn>
void for_each_estimate_wwr(const WeightedSample& sample, WwrEstimator mode, Fn&& fn) {
    // slot_items is sorted by id; walk runs of duplicates once.
    for (std::size_t i = 0; i < sample.slot_items.size();) {
        std::size_t j = i;
        while (j < sample.slot_items.size() &&
               sample.slot_items[j].id == sample.slot_items[i].id)
            ++j;
        const ItemRecord& item = sample.slot_items[i];
        double estimate;
        if (mode == WwrEstimator::duplicate_count) {
            estimate = static_cast<double>(j - i) * sample.total_weight /
                       static_cast<double>(sample.k);
        } else {
            double p = wwr_presence_probability(item.weight, sample.total_weight, sample.k);
            estimate = p > 0.0 ? item.weight / p : 0.0;
        }
        fn(item, estimate);
        i = j;
    }
}

struct SubsetTruth {
    std::string label;
    const SubsetPredicate* predicate;
    double truth;
};

struct ReplicateOutput {
    std::vector<ComparisonRow> rows;
    std::vector<DistinctCountRow> distinct;
    std::vector<MatrixErrorRow> matrix;
};

}  // namespace

ComparisonResult run_comparison(const Trace& trace, const ComparisonSpec& spec) {
    const std::size_t n = trace.items.size();

    std::vector<SubsetTruth> subsets;
    for (const auto& labeled : spec.subsets) {
        double truth = 0.0;
        for (const auto& item : trace.items) {
            if (labeled.predicate(item))
                truth += item.weight;
        }
        if (!(truth > 0.0))
            throw std::invalid_argument("run_comparison: subset '" + labeled.label +
                                        "' has no weight in the trace");
        subsets.push_back({labeled.label, &labeled.predicate, truth});
    }

    std::vector<double> matrix_truth(kMatrixSide * kMatrixSide, 0.0);
    double total_weight = trace.summary.total_weight;
    if (spec.matrix) {
        for (const auto& item : trace.items) {
            std::size_t cell = matrix_cell(item);
            if (cell == std::numeric_limits<std::size_t>::max())
                throw std::invalid_argument("run_comparison: matrix needs in/out attributes");
            matrix_truth[cell] += item.weight;
        }
    }

    auto evaluate = [&](SchemeTag scheme, std::size_t k, std::size_t replicate,
                        const auto& sample, std::size_t distinct, ReplicateOutput& out) {
        for (const auto& subset : subsets) {
            double estimate = 0.0;
            if constexpr (std::is_same_v<std::decay_t<decltype(sample)>, WeightedSample>) {
                for_each_estimate_wwr(sample, spec.wwr_mode, [&](const ItemRecord& item, double est) {
                    if ((*subset.predicate)(item))
                        estimate += est;
                });
            } else {
                for_each_estimate(sample, [&](const ItemRecord& item, double est) {
                    if ((*subset.predicate)(item))
                        estimate += est;
                });
            }
            out.rows.push_back({scheme, k, replicate, subset.label, subset.truth, estimate,
                                (estimate - subset.truth) / subset.truth});
        }
        if (spec.matrix) {
            std::vector<double> cells(kMatrixSide * kMatrixSide, 0.0);
            auto add = [&](const ItemRecord& item, double est) {
                std::size_t cell = matrix_cell(item);
                if (cell != std::numeric_limits<std::size_t>::max())
                    cells[cell] += est;
            };
            if constexpr (std::is_same_v<std::decay_t<decltype(sample)>, WeightedSample>) {
                for_each_estimate_wwr(sample, spec.wwr_mode, add);
            } else {
                for_each_estimate(sample, add);
            }
            double abs_error = 0.0;
            for (std::size_t c = 0; c < cells.size(); ++c)
                abs_error += std::abs(cells[c] - matrix_truth[c]);
            out.matrix.push_back({scheme, k, replicate, abs_error / total_weight});
        }
        out.distinct.push_back({scheme, k, replicate, distinct,
                                100.0 * static_cast<double>(distinct) /
                                    static_cast<double>(k)});
    };

    auto run_replicate = [&](std::size_t replicate) {
        ReplicateOutput out;
        std::uint64_t replicate_seed = derive_seed(spec.seed, replicate);

        bool with_priorities =
            std::count(spec.schemes.begin(), spec.schemes.end(), SchemeTag::pri) ||
            std::count(spec.schemes.begin(), spec.schemes.end(), SchemeTag::thr);
        std::vector<double> alphas;
        if (with_priorities) {
            // One priority sequence per replicate, shared by the priority and
            // threshold schemes at every k.
            SeededGenerator pgen(derive_seed(replicate_seed, 0));
            alphas.resize(n);
            for (double& a : alphas)
                a = pgen.next_alpha();
        }

        for (std::size_t k : spec.k_grid) {
            for (SchemeTag scheme : spec.schemes) {
                switch (scheme) {
                    case SchemeTag::pri: {
                        PriorityReservoir reservoir(k);
                        for (std::size_t i = 0; i < n; ++i)
                            reservoir.insert(prioritize(trace.items[i], alphas[i]));
                        PrioritySample sample = reservoir.finalize();
                        evaluate(scheme, k, replicate, sample, sample.entries.size(), out);
                        break;
                    }
                    case SchemeTag::thr: {
                        ThresholdReservoir reservoir(k);
                        for (std::size_t i = 0; i < n; ++i)
                            reservoir.insert(prioritize(trace.items[i], alphas[i]));
                        ThresholdSample sample = reservoir.finalize();
                        evaluate(scheme, k, replicate, sample, sample.entries.size(), out);
                        break;
                    }
                    case SchemeTag::uwr: {
                        SeededGenerator gen(derive_seed(derive_seed(replicate_seed, 1), k));
                        UniformReservoir reservoir(k);
                        for (const auto& item : trace.items)
                            reservoir.insert(item, gen);
                        UniformSample sample = reservoir.finalize();
                        evaluate(scheme, k, replicate, sample, sample.entries.size(), out);
                        break;
                    }
                    case SchemeTag::wwr: {
                        SeededGenerator gen(derive_seed(derive_seed(replicate_seed, 2), k));
                        WeightedReplacementSampler sampler(k);
                        for (const auto& item : trace.items)
                            sampler.insert(item, gen);
                        WeightedSample sample = sampler.finalize();
                        std::size_t distinct = 0;
                        for (std::size_t i = 0; i < sample.slot_items.size();) {
                            std::size_t j = i;
                            while (j < sample.slot_items.size() &&
                                   sample.slot_items[j].id == sample.slot_items[i].id)
                                ++j;
                            ++distinct;
                            i = j;
                        }
                        evaluate(scheme, k, replicate, sample, distinct, out);
                        break;
                    }
                }
            }
        }
        return out;
    };

    // Replicates are independent; run them on all cores and merge in order.
    std::vector<ReplicateOutput> outputs(spec.replicates);
    std::atomic<std::size_t> next{0};
    unsigned n_threads = std::min<unsigned>(std::thread::hardware_concurrency(),
                                            static_cast<unsigned>(spec.replicates));
    if (n_threads < 1)
        n_threads = 1;
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t r = next.fetch_add(1);
                if (r >= spec.replicates)
                    return;
                outputs[r] = run_replicate(r);
            }
        });
    }
    for (auto& thread : threads)
        thread.join();

    ComparisonResult result;
    for (auto& out : outputs) {
        result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
        result.distinct.insert(result.distinct.end(), out.distinct.begin(), out.distinct.end());
        result.matrix.insert(result.matrix.end(), out.matrix.begin(), out.matrix.end());
    }
    return result;
}

namespace {

void set_csv_format(std::ostream& out) {
    out.precision(17);
}

}  // namespace

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    set_csv_format(out);
    out << "scheme,k,replicate,subset,truth,estimate,rel_error\n";
    for (const auto& row : rows) {
        out << to_string(row.scheme) << ',' << row.k << ',' << row.replicate << ',' << row.subset
            << ',' << row.truth << ',' << row.estimate << ',' << row.rel_error << '\n';
    }
}

void write_distinct_csv(std::ostream& out, const std::vector<DistinctCountRow>& rows) {
    set_csv_format(out);
    out << "scheme,k,replicate,distinct,pct_of_target\n";
    for (const auto& row : rows) {
        out << to_string(row.scheme) << ',' << row.k << ',' << row.replicate << ','
            << row.distinct << ',' << row.pct_of_target << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const std::vector<MatrixErrorRow>& rows) {
    set_csv_format(out);
    out << "scheme,k,replicate,aggregate_error\n";
    for (const auto& row : rows) {
        out << to_string(row.scheme) << ',' << row.k << ',' << row.replicate << ','
            << row.aggregate_error << '\n';
    }
}

}  // namespace priosample
