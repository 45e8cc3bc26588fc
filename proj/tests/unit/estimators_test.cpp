#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "priosample/estimators.hpp"
#include "priosample/priority_reservoir.hpp"
#include "priosample/rng.hpp"
#include "priosample/threshold_reservoir.hpp"
#include "priosample/weighted_replacement.hpp"
#include "test_oracles.hpp"

using namespace priosample;
using testsupport::make_item;

namespace {

PrioritySample hand_sample(std::vector<std::pair<std::uint64_t, double>> id_weights,
                           double threshold, std::size_t k, std::uint64_t items_seen) {
    PrioritySample sample;
    sample.k = k;
    sample.items_seen = items_seen;
    sample.threshold = threshold;
    for (auto [id, w] : id_weights) {
        PrioritizedItem entry;
        entry.item = make_item(id, w);
        entry.alpha = 0.5;
        entry.priority = threshold + 1.0 + static_cast<double>(id);
        sample.entries.push_back(entry);
    }
    return sample;
}

}  // namespace

TEST_CASE("weight estimate is max{w, tau} for sampled items, 0 otherwise") {
    PrioritySample sample = hand_sample({{0, 5.0}, {1, 2.0}}, 3.0, 2, 10);
    CHECK(pri_weight_estimate(sample, 0) == 5.0);
    CHECK(pri_weight_estimate(sample, 1) == 3.0);
    CHECK(pri_weight_estimate(sample, 7) == 0.0);  // unknown id counts as unsampled
}

TEST_CASE("variance estimator vanishes when w >= tau") {
    PrioritySample sample = hand_sample({{0, 5.0}, {1, 2.0}}, 3.0, 2, 10);
    CHECK(pri_variance_estimate(sample, 0) == 0.0);
    CHECK(pri_variance_estimate(sample, 1) == 3.0 * (3.0 - 2.0));
    CHECK(pri_variance_estimate(sample, 9) == 0.0);
}

TEST_CASE("variance estimator mean matches the empirical variance") {
    // Non-unit weights separate the unbiased estimator tau*max{0,tau-w} from
    // misreadings carrying an extra weight factor.
    std::vector<double> weights{2.0, 1.0, 1.0};
    const std::size_t trials = 400'000;
    const std::size_t k = 2;
    std::vector<double> sum_v(weights.size(), 0.0);
    std::vector<double> sum_dev2(weights.size(), 0.0);
    std::vector<double> sum_v2(weights.size(), 0.0);
    std::vector<double> sum_dev4(weights.size(), 0.0);
    SeededGenerator gen(31);
    PriorityReservoir reservoir(k);
    for (std::size_t t = 0; t < trials; ++t) {
        reservoir.clear();
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        PrioritySample sample = reservoir.finalize();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            double vhat = pri_variance_estimate(sample, i);
            double dev = pri_weight_estimate(sample, i) - weights[i];
            sum_v[i] += vhat;
            sum_v2[i] += vhat * vhat;
            sum_dev2[i] += dev * dev;
            sum_dev4[i] += dev * dev * dev * dev;
        }
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double mean_v = sum_v[i] / trials;
        double var_emp = sum_dev2[i] / trials;
        double se_v = std::sqrt((sum_v2[i] / trials - mean_v * mean_v) / trials);
        double se_var = std::sqrt((sum_dev4[i] / trials - var_emp * var_emp) / trials);
        double joint = std::hypot(se_v, se_var);
        CHECK(std::abs(mean_v - var_emp) <= 4.0 * joint);
    }
}

TEST_CASE("weight estimates are unbiased on a skewed instance") {
    std::vector<double> weights{8, 4, 2, 1, 1, 1};
    const std::size_t trials = 200'000;
    std::vector<double> sum(weights.size(), 0.0);
    std::vector<double> sum2(weights.size(), 0.0);
    SeededGenerator gen(32);
    PriorityReservoir reservoir(3);
    for (std::size_t t = 0; t < trials; ++t) {
        reservoir.clear();
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        PrioritySample sample = reservoir.finalize();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            double est = pri_weight_estimate(sample, i);
            sum[i] += est;
            sum2[i] += est * est;
        }
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double mean = sum[i] / trials;
        double se = std::sqrt((sum2[i] / trials - mean * mean) / trials);
        CHECK(std::abs(mean - weights[i]) <= 3.5 * se);
    }
}

TEST_CASE("secondary estimates scale by max{1, tau/w}") {
    PrioritySample sample = hand_sample({{0, 2.0}, {1, 4.0}}, 3.0, 2, 10);
    sample.entries[0].item.secondary = -10.0;
    sample.entries[1].item.secondary = 7.5;
    CHECK(secondary_estimate(sample, 0) == -15.0);  // max{1, 1.5} * (-10)
    CHECK(secondary_estimate(sample, 1) == 7.5);    // w >= tau passes x through
    CHECK(secondary_estimate(sample, 3) == 0.0);    // unsampled
}

TEST_CASE("secondary on a sampled zero-weight item is rejected") {
    PrioritySample sample = hand_sample({{0, 0.0}}, 0.0, 2, 1);
    sample.entries[0].item.secondary = 4.0;
    CHECK_THROWS_AS(secondary_estimate(sample, 0), std::domain_error);
}

TEST_CASE("secondary estimates are unbiased with |x| weighting") {
    std::vector<double> xs{-4, 3, -2, 1};
    const std::size_t trials = 200'000;
    std::vector<double> sum(xs.size(), 0.0), sum2(xs.size(), 0.0);
    SeededGenerator gen(33);
    PriorityReservoir reservoir(2);
    for (std::size_t t = 0; t < trials; ++t) {
        reservoir.clear();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ItemRecord item = make_item(i, std::abs(xs[i]));
            item.secondary = xs[i];
            reservoir.insert(prioritize(std::move(item), gen.next_alpha()));
        }
        PrioritySample sample = reservoir.finalize();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double est = secondary_estimate(sample, i);
            sum[i] += est;
            sum2[i] += est * est;
        }
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double mean = sum[i] / trials;
        double se = std::sqrt((sum2[i] / trials - mean * mean) / trials);
        CHECK(std::abs(mean - xs[i]) <= 3.5 * se);
    }
}

TEST_CASE("threshold estimates: heavy items pass through exactly") {
    SeededGenerator gen(34);
    const std::size_t trials = 50'000;
    for (std::size_t t = 0; t < trials; ++t) {
        ThresholdReservoir reservoir(2);
        std::vector<double> weights{4, 2, 1, 1};
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        ThresholdSample sample = reservoir.finalize();
        // Item 0 has w = tau = 4: sampled every time with zero-variance estimate.
        CHECK(thr_weight_estimate(sample, 0) == 4.0);
        CHECK(thr_variance_estimate(sample, 0) == 0.0);
    }
}

TEST_CASE("threshold estimate of a light item is an unbiased Bernoulli blow-up") {
    SeededGenerator gen(35);
    const std::size_t trials = 400'000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        ThresholdReservoir reservoir(2);
        std::vector<double> weights{4, 2, 1, 1};
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        double est = thr_weight_estimate(reservoir.finalize(), 3);  // w=1, tau=4
        sum += est;
        sum2 += est * est;
    }
    double mean = sum / trials;
    double se = std::sqrt((sum2 / trials - mean * mean) / trials);
    CHECK(std::abs(mean - 1.0) <= 3.5 * se);
    CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("uniform estimate scales by n/k") {
    UniformSample sample;
    sample.k = 2;
    sample.items_seen = 10;
    sample.entries = {make_item(3, 7.0)};
    CHECK(uwr_weight_estimate(sample, 3) == 35.0);
    CHECK(uwr_weight_estimate(sample, 4) == 0.0);

    UniformSample full;
    full.k = 5;
    full.items_seen = 5;
    full.entries = {make_item(0, 2.0)};
    CHECK(uwr_weight_estimate(full, 0) == 2.0);  // n=k: estimate equals weight
}

TEST_CASE("with-replacement estimators: presence and duplicate-count modes") {
    WeightedSample sample;
    sample.k = 2;
    sample.items_seen = 3;
    sample.total_weight = 10.0;
    sample.slot_items = {make_item(1, 5.0), make_item(1, 5.0)};
    // presence: p = 1-(1-1/2)^2 = 3/4, estimate = 5/(3/4) = 20/3
    CHECK(wwr_weight_estimate(sample, 1, WwrEstimator::presence) ==
          doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    // duplicate-count: 2 slots * W/k = 2 * 5 = 10
    CHECK(wwr_weight_estimate(sample, 1, WwrEstimator::duplicate_count) == 10.0);
    CHECK(wwr_weight_estimate(sample, 0, WwrEstimator::presence) == 0.0);
}

TEST_CASE("both with-replacement modes are unbiased; presence has less variance") {
    std::vector<double> weights{3, 1};
    const std::size_t trials = 300'000;
    const std::size_t k = 2;
    double sum_p = 0.0, sum_p2 = 0.0, sum_c = 0.0, sum_c2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        SeededGenerator gen(derive_seed(36, t));
        WeightedReplacementSampler sampler(k);
        for (std::size_t i = 0; i < weights.size(); ++i)
            sampler.insert(make_item(i, weights[i]), gen);
        WeightedSample sample = sampler.finalize();
        double p = wwr_weight_estimate(sample, 0, WwrEstimator::presence);
        double c = wwr_weight_estimate(sample, 0, WwrEstimator::duplicate_count);
        sum_p += p;
        sum_p2 += p * p;
        sum_c += c;
        sum_c2 += c * c;
    }
    double mean_p = sum_p / trials, mean_c = sum_c / trials;
    double var_p = sum_p2 / trials - mean_p * mean_p;
    double var_c = sum_c2 / trials - mean_c * mean_c;
    double se_p = std::sqrt(var_p / trials), se_c = std::sqrt(var_c / trials);
    CHECK(std::abs(mean_p - 3.0) <= 3.5 * se_p);
    CHECK(std::abs(mean_c - 3.0) <= 3.5 * se_c);
    CHECK(var_p <= var_c);
}

TEST_CASE("subset predicate: conjunction of equalities plus weight range") {
    SubsetPredicate pred;
    pred.attribute_equals = {{"app", "ftp"}, {"in", "3"}};
    pred.weight_min = 10.0;

    ItemRecord match = make_item(0, 50.0);
    match.attributes = {{"app", "ftp"}, {"in", "3"}, {"out", "5"}};
    CHECK(pred(match));

    ItemRecord wrong_value = match;
    wrong_value.attributes["in"] = "4";
    CHECK_FALSE(pred(wrong_value));

    ItemRecord missing_key = make_item(1, 50.0);
    missing_key.attributes = {{"app", "ftp"}};
    CHECK_FALSE(pred(missing_key));

    ItemRecord too_light = match;
    too_light.weight = 5.0;
    CHECK_FALSE(pred(too_light));

    SubsetPredicate range_only;
    range_only.weight_min = 1.0;
    range_only.weight_max = 2.0;
    CHECK(range_only(make_item(2, 1.5)));
    CHECK_FALSE(range_only(make_item(3, 2.5)));
}

TEST_CASE("subset estimate sums matching contributions") {
    PrioritySample sample = hand_sample({{0, 5.0}, {1, 2.0}, {2, 1.0}}, 3.0, 3, 12);
    sample.entries[0].item.attributes["app"] = "ftp";
    sample.entries[1].item.attributes["app"] = "ftp";
    sample.entries[2].item.attributes["app"] = "dns";

    SubsetPredicate ftp;
    ftp.attribute_equals = {{"app", "ftp"}};
    EstimateReport report = subset_estimate(sample, ftp);
    CHECK(report.estimate == 5.0 + 3.0);
    CHECK(report.variance_estimate == 0.0 + 3.0 * 1.0);
    REQUIRE(report.contributions.size() == 2);
    double total = 0.0, total_v = 0.0;
    for (const auto& c : report.contributions) {
        total += c.weight_estimate;
        total_v += c.variance_estimate;
    }
    CHECK(total == report.estimate);
    CHECK(total_v == report.variance_estimate);

    SubsetPredicate none;
    none.attribute_equals = {{"app", "smtp"}};
    EstimateReport empty = subset_estimate(sample, none);
    CHECK(empty.estimate == 0.0);
    CHECK(empty.variance_estimate == 0.0);
    CHECK(empty.contributions.empty());
}

TEST_CASE("subset estimate over everything in the sample-it-all regime") {
    SeededGenerator gen(37);
    PriorityReservoir reservoir(8);
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        double w = 1.0 + static_cast<double>(i);
        total += w;
        reservoir.insert(prioritize(make_item(i, w), gen.next_alpha()));
    }
    EstimateReport report =
        subset_estimate(reservoir.finalize(), [](const ItemRecord&) { return true; });
    CHECK(report.estimate == total);
    CHECK(report.variance_estimate == 0.0);
}

TEST_CASE("k=1 priority reports flag the variance as unreliable") {
    SeededGenerator gen(38);
    PriorityReservoir reservoir(1);
    for (std::size_t i = 0; i < 4; ++i)
        reservoir.insert(prioritize(make_item(i, 1.0), gen.next_alpha()));
    EstimateReport report =
        subset_estimate(reservoir.finalize(), [](const ItemRecord&) { return true; });
    CHECK(report.variance_unreliable);

    PriorityReservoir wide(4);
    for (std::size_t i = 0; i < 3; ++i)
        wide.insert(prioritize(make_item(i, 1.0), gen.next_alpha()));
    CHECK_FALSE(subset_estimate(wide.finalize(), [](const ItemRecord&) { return true; })
                    .variance_unreliable);
}

TEST_CASE("estimates and variance estimators are never negative") {
    SeededGenerator gen(40);
    for (int round = 0; round < 50; ++round) {
        std::size_t n = 1 + gen.next_below(60);
        std::size_t k = 1 + gen.next_below(12);
        PriorityReservoir pri(k);
        ThresholdReservoir thr(k);
        for (std::size_t i = 0; i < n; ++i) {
            // include occasional zero weights
            double w = gen.next_below(10) == 0 ? 0.0 : 20.0 * gen.next_alpha();
            auto pitem = prioritize(make_item(i, w), gen.next_alpha());
            pri.insert(pitem);
            thr.insert(std::move(pitem));
        }
        PrioritySample ps = pri.finalize();
        ThresholdSample ts = thr.finalize();
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(pri_weight_estimate(ps, i) >= 0.0);
            CHECK(pri_variance_estimate(ps, i) >= 0.0);
            CHECK(thr_weight_estimate(ts, i) >= 0.0);
            CHECK(thr_variance_estimate(ts, i) >= 0.0);
        }
    }
}

TEST_CASE("planted subset estimates are unbiased") {
    // Subset worth ~30% of the total weight.
    std::vector<double> weights{8, 4, 2, 1, 1, 1};  // subset {1,2} = 6/17
    std::vector<std::size_t> subset{1, 2};
    double truth = 6.0;
    const std::size_t trials = 200'000;
    double sum = 0.0, sum2 = 0.0;
    SeededGenerator gen(39);
    PriorityReservoir reservoir(3);
    for (std::size_t t = 0; t < trials; ++t) {
        reservoir.clear();
        for (std::size_t i = 0; i < weights.size(); ++i)
            reservoir.insert(prioritize(make_item(i, weights[i]), gen.next_alpha()));
        PrioritySample sample = reservoir.finalize();
        double est = 0.0;
        for (std::size_t id : subset)
            est += pri_weight_estimate(sample, id);
        sum += est;
        sum2 += est * est;
    }
    double mean = sum / trials;
    double se = std::sqrt((sum2 / trials - mean * mean) / trials);
    CHECK(std::abs(mean - truth) <= 3.5 * se);
    CHECK(std::abs(mean - truth) / truth < 0.01);
}
