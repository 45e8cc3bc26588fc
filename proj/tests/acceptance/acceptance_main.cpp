// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavy Monte Carlo settings match the documented targets; every
// tolerance is pinned here in code.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "priosample/analysis.hpp"
#include "priosample/comparison.hpp"
#include "priosample/estimators.hpp"
#include "priosample/parallel.hpp"
#include "priosample/priority_reservoir.hpp"
#include "priosample/relaxed_reservoir.hpp"
#include "priosample/rng.hpp"
#include "priosample/threshold_reservoir.hpp"
#include "priosample/trace.hpp"
#include "priosample/uniform_reservoir.hpp"
#include "priosample/verify.hpp"
#include "priosample/weighted_replacement.hpp"
#include "test_oracles.hpp"

using namespace priosample;
using testsupport::make_item;

namespace {

std::uint64_t g_suite_seed = 20240915;

struct CorpusEntry {
    std::string name;
    std::vector<double> weights;
    std::size_t trials;
};

std::vector<CorpusEntry> unbiasedness_corpus() {
    std::vector<CorpusEntry> corpus;
    corpus.push_back({"unit n=20", std::vector<double>(20, 1.0), 1'000'000});
    corpus.push_back({"mixed {8,4,2,1,1,1}", {8, 4, 2, 1, 1, 1}, 1'000'000});
    {
        TraceSpec spec;
        spec.law = LargeSmallLaw{3, 1e6, 1000};
        CorpusEntry entry{"large-small(3,1e6,1e3)", {}, 100'000};
        for (const auto& item : generate_trace(spec).items)
            entry.weights.push_back(item.weight);
        corpus.push_back(std::move(entry));
    }
    {
        TraceSpec spec;
        spec.law = ParetoLaw{1000, 1.1, 1.0};
        spec.seed = derive_seed(g_suite_seed, 9001);
        CorpusEntry entry{"pareto(1.1) n=1e3", {}, 100'000};
        for (const auto& item : generate_trace(spec).items)
            entry.weights.push_back(item.weight);
        corpus.push_back(std::move(entry));
    }
    return corpus;
}

// Three planted subsets per corpus entry: a prefix worth >= 30% of the
// weight, a spread-out residue-class subset, and the light half by weight.
// The light half is what gives the test power over items too rarely sampled
// to carry individual evidence.
std::vector<std::vector<std::uint32_t>> planted_subsets(const std::vector<double>& weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::uint32_t> prefix;
    double mass = 0.0;
    for (std::uint32_t i = 0; i < weights.size() && mass < 0.3 * total; ++i) {
        prefix.push_back(i);
        mass += weights[i];
    }
    std::vector<std::uint32_t> spread;
    for (std::uint32_t i = 0; i < weights.size(); i += 3)
        spread.push_back(i);
    std::vector<double> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    std::vector<std::uint32_t> light;
    for (std::uint32_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= median)
            light.push_back(i);
    }
    return {prefix, spread, light};
}

bool criterion_unbiasedness(std::ostream& out) {
    bool pass = true;
    std::size_t lane = 0;
    for (const CorpusEntry& entry : unbiasedness_corpus()) {
        bool small = entry.weights.size() <= 20;
        for (std::size_t k : {2, 3, 5, 10}) {
            MomentRequest request;
            request.subsets = planted_subsets(entry.weights);
            McOptions options{entry.trials, derive_seed(g_suite_seed, 140 + lane++)};
            PriorityMoments moments = priority_moments(entry.weights, k, options, request);

            // Per-item means. On the 10^3-item corpora a literal all-pass
            // 3-sigma gate fails by chance alone, and the empirical-sigma
            // z-statistic is only calibrated once an item has been sampled
            // often enough (about 100 hits; below that both tails are far
            // off Gaussian). So the large corpora z-test items with >= 100
            // hits against a joint 5-sigma band plus a 97.5% coverage floor
            // at 3 sigma, and rarely-hit items are covered in aggregate by
            // the light-half subset below, which is where the statistical
            // power over them actually lives. A zero standard error with a
            // nonzero mean is the exact (k >= n) regime.
            std::size_t checked = 0, within3 = 0, low_evidence = 0;
            double worst_z = 0.0;
            for (std::size_t i = 0; i < entry.weights.size(); ++i) {
                if (moments.se_estimate[i] == 0.0) {
                    if (moments.mean_estimate[i] == 0.0) {
                        ++low_evidence;
                        continue;
                    }
                    ++checked;
                    if (moments.mean_estimate[i] == entry.weights[i])
                        ++within3;
                    else
                        pass = false;
                    continue;
                }
                if (!small && moments.hit_count[i] < 100) {
                    ++low_evidence;
                    continue;
                }
                double z = std::abs(moments.mean_estimate[i] - entry.weights[i]) /
                           moments.se_estimate[i];
                worst_z = std::max(worst_z, z);
                ++checked;
                within3 += z <= 3.0;
                if (small && z > 3.0)
                    pass = false;
                if (!small && z > 5.0)
                    pass = false;
            }
            if (!small && checked > 0 &&
                static_cast<double>(within3) / static_cast<double>(checked) < 0.975)
                pass = false;

            // Subset sums on the heavy-tailed corpora are dominated by a few
            // giant contributions and share the skewed t-statistic, so they
            // get the same joint 5-sigma band; small corpora stay at 3 sigma.
            double worst_subset_z = 0.0;
            for (std::size_t s = 0; s < request.subsets.size(); ++s) {
                double truth = 0.0;
                for (std::uint32_t id : request.subsets[s])
                    truth += entry.weights[id];
                double z = std::abs(moments.subset_mean[s] - truth) / moments.subset_se[s];
                worst_subset_z = std::max(worst_subset_z, z);
                if (z > (small ? 3.0 : 5.0))
                    pass = false;
            }
            out << "    " << entry.name << " k=" << k << ": items checked=" << checked
                << " low-evidence=" << low_evidence << " worst item z=" << worst_z
                << " within 3sigma=" << within3 << "/" << checked
                << " worst subset z=" << worst_subset_z << "\n";
        }
    }
    return pass;
}

bool criterion_unit_threshold_identity(std::ostream& out) {
    std::vector<double> unit(100, 1.0);
    McOptions options{100'000, derive_seed(g_suite_seed, 200)};
    PriorityMoments moments = priority_moments(unit, 10, options);
    double z = std::abs(moments.mean_k_tau - 100.0) / moments.se_k_tau;
    out << "    mean k*tau = " << moments.mean_k_tau << " (se " << moments.se_k_tau
        << "), z = " << z << "\n";
    return z <= 3.0;
}

PriorityMoments mixed_six_moments() {
    static PriorityMoments moments = [] {
        MomentRequest request;
        request.pairwise = true;
        McOptions options{1'000'000, derive_seed(g_suite_seed, 300)};
        std::vector<double> weights{8, 4, 2, 1, 1, 1};
        return priority_moments(weights, 3, options, request);
    }();
    return moments;
}

bool criterion_zero_covariance(std::ostream& out) {
    PriorityMoments moments = mixed_six_moments();
    bool pass = true;
    double worst_z = 0.0;
    for (std::size_t p = 0; p < moments.pairs.size(); ++p) {
        double z = std::abs(moments.mean_pair_cov[p]) / moments.se_pair_cov[p];
        worst_z = std::max(worst_z, z);
        if (z > 3.0)
            pass = false;
    }
    out << "    " << moments.pairs.size() << " pairwise covariances, worst z = " << worst_z
        << "\n";
    return pass;
}

bool criterion_variance_estimator(std::ostream& out) {
    PriorityMoments moments = mixed_six_moments();
    std::vector<double> weights{8, 4, 2, 1, 1, 1};
    bool pass = true;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double joint = std::hypot(moments.se_variance_estimator[i],
                                  moments.se_empirical_variance[i]);
        double z = std::abs(moments.mean_variance_estimator[i] - moments.empirical_variance[i]) /
                   joint;
        worst_z = std::max(worst_z, z);
        out << "    item " << i << ": mean vhat=" << moments.mean_variance_estimator[i]
            << " empirical=" << moments.empirical_variance[i] << " z=" << z << "\n";
        if (z > 3.0)
            pass = false;
    }
    out << "    worst z = " << worst_z << "\n";
    return pass;
}

bool criterion_closed_forms(std::ostream& out) {
    VerificationReport report = closed_forms_suite(1'000'000, derive_seed(g_suite_seed, 400));
    for (const auto& check : report.checks) {
        out << "    " << (check.pass ? "ok  " : "FAIL") << " " << check.name << ": "
            << check.estimate << " vs " << check.target << "\n";
    }
    return report.all_pass();
}

bool criterion_oracle(std::ostream& out) {
    VerificationReport report = oracle_suite(10'000'000, derive_seed(g_suite_seed, 500));
    bool pass = report.all_pass();
    for (const auto& check : report.checks) {
        out << "    " << (check.pass ? "ok  " : "FAIL") << " " << check.name << ": "
            << check.estimate << " vs " << check.target << "\n";
    }
    return pass;
}

bool criterion_threshold_solver(std::ostream& out) {
    SeededGenerator meta(derive_seed(g_suite_seed, 600));
    double worst_residual = 0.0;
    bool pass = true;
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 2 + meta.next_below(255);
        std::size_t k = 1 + meta.next_below(std::min<std::size_t>(n - 1, 64));
        SeededGenerator gen(derive_seed(g_suite_seed, 7000 + round));
        std::vector<double> weights(n);
        for (double& w : weights)
            w = std::pow(10.0, 4.0 * gen.next_alpha());
        ThresholdReservoir reservoir(k);
        for (std::size_t i = 0; i < n; ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        double tau = reservoir.threshold();
        double solved = 0.0;
        for (double w : weights)
            solved += std::min(1.0, w / tau);
        double residual = std::abs(solved - static_cast<double>(k));
        worst_residual = std::max(worst_residual, residual / k);
        if (residual > 1e-9 * static_cast<double>(k))
            pass = false;
    }
    out << "    1000 random weight sets: worst |sum - k|/k = " << worst_residual << "\n";

    // Mean sample size over replicates on one fixed set.
    std::vector<double> weights;
    SeededGenerator wgen(derive_seed(g_suite_seed, 601));
    for (std::size_t i = 0; i < 64; ++i)
        weights.push_back(std::pow(10.0, 3.0 * wgen.next_alpha()));
    const std::size_t k = 12;
    const std::size_t replicates = 10'000;
    std::vector<double> sizes;
    sizes.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        SeededGenerator gen(derive_seed(g_suite_seed, 8000 + r));
        ThresholdReservoir reservoir(k);
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        sizes.push_back(static_cast<double>(reservoir.sample_size()));
    }
    auto stats = testsupport::mean_var(sizes);
    double z = std::abs(stats.mean - static_cast<double>(k)) / stats.se_mean;
    out << "    mean sample size over " << replicates << " replicates = " << stats.mean
        << " (target " << k << ", z = " << z << ")\n";
    return pass && z <= 3.0;
}

bool criterion_relaxed_equivalence(std::ostream& out) {
    SeededGenerator meta(derive_seed(g_suite_seed, 700));
    bool pass = true;
    std::size_t streams = 0;
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 1 + meta.next_below(10'000);
        for (std::size_t k : {1, 10, 100}) {
            SeededGenerator gen(derive_seed(g_suite_seed, 9000 + round * 3 + k));
            PriorityReservoir exact(k);
            RelaxedBuffer single(k);
            DualRelaxedBuffer dual(k);
            for (std::size_t i = 0; i < n; ++i) {
                auto pitem = prioritize(make_item(i, 100.0 * gen.next_alpha()),
                                        gen.next_alpha());
                exact.insert(pitem);
                single.insert(pitem);
                dual.insert(std::move(pitem));
            }
            PrioritySample expected = exact.finalize();
            if (!testsupport::same_sample(single.finalize(), expected) ||
                !testsupport::same_sample(dual.finalize(), expected))
                pass = false;
            ++streams;
        }
    }
    out << "    " << streams << " (stream, k) combinations, single and dual buffers"
        << (pass ? " identical to the exact reservoir\n" : " DIVERGED\n");
    return pass;
}

bool criterion_exactify(std::ostream& out) {
    SeededGenerator gen(derive_seed(g_suite_seed, 800));
    double worst_marginal = 0.0, worst_mass = 0.0;
    bool pass = true;
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 2 + gen.next_below(11);
        std::size_t k = 1 + gen.next_below(n);
        InclusionScheme scheme = random_feasible_marginals(n, k, gen);
        auto events = exactify(scheme);
        if (events.size() > n)
            pass = false;
        double mass = 0.0;
        for (const auto& event : events) {
            mass += event.mass;
            if (event.picked_count() != k)
                pass = false;
        }
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        for (std::uint32_t i = 0; i < n; ++i)
            worst_marginal = std::max(
                worst_marginal,
                std::abs(inclusion_probability(events, i) - scheme.probabilities[i]));
    }
    if (worst_mass > 1e-12 || worst_marginal > 1e-9)
        pass = false;
    out << "    1000 feasible vectors (n<=12): worst |mass-1| = " << worst_mass
        << ", worst marginal deviation = " << worst_marginal << "\n";
    return pass;
}

bool criterion_conjecture(std::ostream& out) {
    VerificationReport report = conjecture_suite(1'000'000, derive_seed(g_suite_seed, 900));
    bool pass = report.all_pass();
    for (const auto& check : report.checks) {
        out << "    " << (check.pass ? "ok  " : "FAIL") << " " << check.name
            << ": pri=" << check.estimate << " thr=" << check.target << "\n";
    }
    return pass;
}

bool criterion_desk_scale(std::ostream& out) {
    Trace trace = generate_trace(gateway_mix_spec(10'000, derive_seed(g_suite_seed, 1000)));
    ComparisonSpec spec;
    spec.schemes = {SchemeTag::pri, SchemeTag::uwr, SchemeTag::wwr};
    spec.k_grid = {100, 150, 200, 400, 800};
    spec.replicates = 100;
    spec.seed = derive_seed(g_suite_seed, 1001);
    spec.matrix = true;
    LabeledPredicate ftp;
    ftp.label = "ftp";
    ftp.predicate.attribute_equals = {{"app", "ftp"}};
    spec.subsets.push_back(ftp);

    ComparisonResult result = run_comparison(trace, spec);

    auto median_abs_rel = [&](SchemeTag scheme, std::size_t k) {
        std::vector<double> errors;
        for (const auto& row : result.rows) {
            if (row.scheme == scheme && row.k == k)
                errors.push_back(std::abs(row.rel_error));
        }
        std::sort(errors.begin(), errors.end());
        return errors[errors.size() / 2];
    };
    double pri150 = median_abs_rel(SchemeTag::pri, 150);
    double uwr150 = median_abs_rel(SchemeTag::uwr, 150);
    double wwr150 = median_abs_rel(SchemeTag::wwr, 150);
    out << "    k=150 median |rel err| on the dominant application: pri=" << pri150
        << " uwr=" << uwr150 << " wwr=" << wwr150 << "\n";
    bool pass = pri150 < uwr150 && pri150 < wwr150;

    auto median_matrix = [&](SchemeTag scheme, std::size_t k) {
        std::vector<double> errors;
        for (const auto& row : result.matrix) {
            if (row.scheme == scheme && row.k == k)
                errors.push_back(row.aggregate_error);
        }
        std::sort(errors.begin(), errors.end());
        return errors[errors.size() / 2];
    };
    for (std::size_t k : spec.k_grid) {
        double pri_err = median_matrix(SchemeTag::pri, k);
        double wwr_err = median_matrix(SchemeTag::wwr, k);
        out << "    k=" << k << " median matrix error: pri=" << pri_err << " wwr=" << wwr_err
            << "\n";
        if (pri_err > wwr_err)
            pass = false;
    }
    return pass;
}

bool criterion_k1_divergence(std::ostream& out) {
    // Running (prefix) empirical variance of item 0's estimate on four unit
    // weights, sampled at decade checkpoints of one stream per seed.
    const std::vector<std::size_t> checkpoints{10'000, 100'000, 1'000'000, 10'000'000};
    const std::size_t seeds = 20;

    auto running_variance = [&](std::size_t k, std::uint64_t seed) {
        SeededGenerator gen(seed);
        PriorityReservoir reservoir(k);
        std::vector<double> at_checkpoint;
        double sum_dev2 = 0.0;
        std::size_t done = 0;
        for (std::size_t cp : checkpoints) {
            for (; done < cp; ++done) {
                reservoir.clear();
                for (std::size_t i = 0; i < 4; ++i)
                    reservoir.insert(prioritize(make_item(i, 1.0), gen.next_alpha()));
                double dev = pri_weight_estimate(reservoir.finalize(), 0) - 1.0;
                sum_dev2 += dev * dev;
            }
            at_checkpoint.push_back(sum_dev2 / static_cast<double>(done));
        }
        return at_checkpoint;
    };

    std::vector<int> monotone(seeds, 0);
    std::vector<int> grew(seeds, 0);
    {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < 2; ++t) {
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t s = next.fetch_add(1);
                    if (s >= seeds)
                        return;
                    auto v = running_variance(1, derive_seed(g_suite_seed, 1100 + s));
                    bool ok = true;
                    for (std::size_t i = 0; i + 1 < v.size(); ++i)
                        ok = ok && v[i] < v[i + 1];
                    monotone[s] = ok;
                    grew[s] = v.back() > v.front();
                }
            });
        }
        for (auto& w : workers)
            w.join();
    }
    int monotone_count = std::accumulate(monotone.begin(), monotone.end(), 0);
    double fraction = static_cast<double>(monotone_count) / seeds;
    out << "    k=1: running variance monotone across {1e4,1e5,1e6,1e7} in "
        << monotone_count << "/" << seeds << " seeds (required >= 0.95); grew over the"
        << " full span in " << std::accumulate(grew.begin(), grew.end(), 0) << "/" << seeds
        << "\n";
    bool k1_pass = fraction >= 0.95;
    if (!k1_pass) {
        out << "    note: at k=1 the estimate's variance is unbounded and the prefix\n"
               "    variance is dominated by the single largest draw, which lands in an\n"
               "    early decade in a seed-independent ~2/3 of runs; strict decade-to-\n"
               "    decade monotonicity is therefore not a stable property of the\n"
               "    divergence, and this sub-check fails as specified.\n";
    }

    // k=2: the running variance settles and respects the n*W*w bound (16).
    bool k2_pass = true;
    for (std::size_t s = 0; s < 5; ++s) {
        auto v = running_variance(2, derive_seed(g_suite_seed, 1200 + s));
        double last = v[v.size() - 1];
        double previous = v[v.size() - 2];
        double rel_change = std::abs(last - previous) / last;
        out << "    k=2 seed " << s << ": V(1e6)=" << previous << " V(1e7)=" << last
            << " rel change=" << rel_change << "\n";
        if (rel_change >= 0.10 || last >= 16.0)
            k2_pass = false;
    }
    return k1_pass && k2_pass;
}

bool criterion_relaxed_work_bound(std::ostream& out) {
    const std::size_t n = 1'000'000;
    std::vector<double> relaxed_per_item;
    std::vector<double> heap_per_item;
    for (std::size_t k : {10UL, 100UL, 1000UL}) {
        SeededGenerator gen(derive_seed(g_suite_seed, 1300));
        RelaxedBuffer relaxed(k);
        PriorityReservoir heap(k);
        for (std::size_t i = 0; i < n; ++i) {
            auto pitem = prioritize(make_item(i, 100.0 * gen.next_alpha()), gen.next_alpha());
            relaxed.insert(pitem);
            heap.insert(std::move(pitem));
        }
        relaxed_per_item.push_back(static_cast<double>(relaxed.comparisons()) / n);
        heap_per_item.push_back(static_cast<double>(heap.comparisons()) / n);
        out << "    k=" << k << ": relaxed " << relaxed_per_item.back()
            << " cmp/item, heap " << heap_per_item.back() << " cmp/item\n";
    }
    double spread = *std::max_element(relaxed_per_item.begin(), relaxed_per_item.end()) /
                    *std::min_element(relaxed_per_item.begin(), relaxed_per_item.end());
    out << "    relaxed spread across k: " << spread << "x (required < 2x)\n";
    bool heap_grows = heap_per_item[0] < heap_per_item[1] && heap_per_item[1] < heap_per_item[2];
    if (!heap_grows)
        out << "    heap comparisons did not grow with k\n";
    return spread < 2.0 && heap_grows;
}

struct Criterion {
    int number;
    std::string name;
    std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc)
            only = std::atoi(argv[a + 1]);
        if (std::strcmp(argv[a], "--seed") == 0 && a + 1 < argc)
            g_suite_seed = std::strtoull(argv[a + 1], nullptr, 10);
    }

    std::vector<Criterion> criteria{
        {1, "unbiased weight and subset estimates across the corpus", criterion_unbiasedness},
        {2, "unit identity: mean of k*tau recovers n", criterion_unit_threshold_identity},
        {3, "zero covariance between distinct weight estimates", criterion_zero_covariance},
        {4, "variance estimator is unbiased per item", criterion_variance_estimator},
        {5, "unit-weight closed forms reproduced within 2%", criterion_closed_forms},
        {6, "brute-force oracle cross-checks", criterion_oracle},
        {7, "threshold solver residual and expected size", criterion_threshold_solver},
        {8, "relaxed buffers reproduce the exact reservoir", criterion_relaxed_equivalence},
        {9, "exact-k construction preserves marginals", criterion_exactify},
        {10, "pri[k+1] total variance never above thr[k]", criterion_conjecture},
        {11, "desk-scale accuracy ordering on gateway traces", criterion_desk_scale},
        {12, "k=1 variance divergence, k=2 stabilization", criterion_k1_divergence},
        {13, "relaxed variant works in O(n) independent of k", criterion_relaxed_work_bound},
    };

    std::cout.precision(10);
    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.number != only)
            continue;
        std::ostringstream detail;
        detail.precision(10);
        bool pass = false;
        try {
            pass = criterion.run(detail);
        } catch (const std::exception& e) {
            detail << "    exception: " << e.what() << "\n";
        }
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion.number << ": "
                  << criterion.name << "\n"
                  << detail.str();
        failures += !pass;
    }
    std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: ")
              << (failures == 0 ? std::string() : std::to_string(failures)) << "\n";
    return failures == 0 ? 0 : 1;
}
