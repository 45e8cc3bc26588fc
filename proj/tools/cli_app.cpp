#include "cli_app.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "priosample/comparison.hpp"
#include "priosample/csv.hpp"
#include "priosample/estimators.hpp"
#include "priosample/persist.hpp"
#include "priosample/priority_reservoir.hpp"
#include "priosample/relaxed_reservoir.hpp"
#include "priosample/rng.hpp"
#include "priosample/threshold_reservoir.hpp"
#include "priosample/trace.hpp"
#include "priosample/uniform_reservoir.hpp"
#include "priosample/verify.hpp"
#include "priosample/weighted_replacement.hpp"

namespace {

using namespace priosample;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct SampleArgs {
    std::string input;
    std::string synthetic;
    std::string scheme = "pri";
    std::size_t k = 0;
    std::uint64_t seed = 1;
    std::string out;
};

struct EstimateArgs {
    std::string sample_path;
    std::vector<std::string> where;
    std::string weight_range;
    std::string mode = "presence";
    bool as_csv = false;
};

struct VerifyArgs {
    std::string suite;
    std::size_t trials = 1'000'000;
    std::uint64_t seed = 1;
};

struct CompareArgs {
    std::string synthetic;
    std::string schemes = "pri,thr,uwr,wwr";
    std::string k_grid;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    std::string out;
    bool no_matrix = false;
    std::vector<std::string> subsets;
};

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            if (!current.empty())
                parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty())
        parts.push_back(current);
    return parts;
}

// The --synthetic argument is either the inline grammar or a path to a file
// holding it (first non-empty line, comments with '#').
TraceSpec resolve_trace_spec(const std::string& arg) {
    std::ifstream file(arg);
    if (!file)
        return parse_trace_spec(arg);
    std::string line;
    while (std::getline(file, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos)
            continue;
        return parse_trace_spec(line.substr(start));
    }
    throw std::runtime_error("spec file " + arg + " holds no spec line");
}

SubsetPredicate parse_predicate(const std::vector<std::string>& where,
                                const std::string& weight_range) {
    SubsetPredicate predicate;
    for (const std::string& term : where) {
        auto eq = term.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--where expects key=value, got '" + term + "'");
        predicate.attribute_equals.emplace_back(term.substr(0, eq), term.substr(eq + 1));
    }
    if (!weight_range.empty()) {
        auto colon = weight_range.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("--weight-range expects lo:hi");
        std::string lo = weight_range.substr(0, colon);
        std::string hi = weight_range.substr(colon + 1);
        if (!lo.empty())
            predicate.weight_min = std::stod(lo);
        if (!hi.empty())
            predicate.weight_max = std::stod(hi);
    }
    return predicate;
}

// Streams the input exactly once into whichever sampler was asked for.
int cmd_sample(const SampleArgs& args) {
    if (args.input.empty() == args.synthetic.empty()) {
        std::cerr << "sample: exactly one of --input / --synthetic is required\n";
        return kExitUsage;
    }

    std::optional<std::ifstream> file;
    std::optional<FlowRecordReader> reader;
    Trace trace;
    std::size_t synthetic_next = 0;
    if (!args.input.empty()) {
        file.emplace(args.input);
        if (!*file) {
            std::cerr << "sample: cannot open " << args.input << "\n";
            return kExitUsage;
        }
        reader.emplace(*file);
    } else {
        trace = generate_trace(resolve_trace_spec(args.synthetic));
    }
    auto next_item = [&]() -> std::optional<ItemRecord> {
        if (reader)
            return reader->next();
        if (synthetic_next < trace.items.size())
            return trace.items[synthetic_next++];
        return std::nullopt;
    };

    SeededGenerator gen(args.seed);
    PersistedSample persisted;
    persisted.seed = args.seed;

    if (args.scheme == "pri" || args.scheme == "pri-relaxed") {
        persisted.scheme = SchemeTag::pri;
        if (args.scheme == "pri") {
            PriorityReservoir reservoir(args.k);
            while (auto item = next_item())
                reservoir.insert(prioritize(std::move(*item), gen.next_alpha()));
            persisted.sample = reservoir.finalize();
        } else {
            RelaxedBuffer buffer(args.k);
            while (auto item = next_item())
                buffer.insert(prioritize(std::move(*item), gen.next_alpha()));
            persisted.sample = buffer.finalize();
        }
    } else if (args.scheme == "thr") {
        persisted.scheme = SchemeTag::thr;
        ThresholdReservoir reservoir(args.k);
        while (auto item = next_item())
            reservoir.insert(prioritize(std::move(*item), gen.next_alpha()));
        persisted.sample = reservoir.finalize();
    } else if (args.scheme == "uwr") {
        persisted.scheme = SchemeTag::uwr;
        UniformReservoir reservoir(args.k);
        while (auto item = next_item())
            reservoir.insert(*item, gen);
        persisted.sample = reservoir.finalize();
    } else if (args.scheme == "wwr") {
        persisted.scheme = SchemeTag::wwr;
        WeightedReplacementSampler sampler(args.k);
        while (auto item = next_item())
            sampler.insert(*item, gen);
        persisted.sample = sampler.finalize();
    } else {
        std::cerr << "sample: unknown scheme '" << args.scheme << "'\n";
        return kExitUsage;
    }

    save_sample_file(args.out, persisted);
    std::cout.precision(17);
    std::cout << "scheme=" << args.scheme << " k=" << args.k
              << " items_seen=" << persisted.items_seen()
              << " distinct_samples=" << persisted.distinct_items()
              << " threshold=" << persisted.threshold() << "\n";
    if (persisted.scheme == SchemeTag::thr) {
        std::cout << "note: threshold sampling targets an expected " << args.k
                  << " samples; the actual count varies by seed\n";
    }
    std::cout << "wrote " << args.out << "\n";
    return kExitOk;
}

nlohmann::json report_to_json(const EstimateReport& report) {
    nlohmann::json j;
    j["scheme"] = std::string(to_string(report.scheme));
    j["k"] = report.k;
    j["items_seen"] = report.items_seen;
    j["estimate"] = report.estimate;
    j["variance_estimate"] = report.variance_estimate;
    if (report.variance_unreliable)
        j["variance_unreliable"] = true;
    nlohmann::json contributions = nlohmann::json::array();
    for (const auto& c : report.contributions) {
        contributions.push_back({{"id", c.id},
                                 {"weight_estimate", c.weight_estimate},
                                 {"variance_estimate", c.variance_estimate}});
    }
    j["contributions"] = std::move(contributions);
    return j;
}

int cmd_estimate(const EstimateArgs& args) {
    PersistedSample persisted = load_sample_file(args.sample_path);
    SubsetPredicate predicate = parse_predicate(args.where, args.weight_range);

    // Warn about attribute keys the sample has never seen: the subset may be
    // real but entirely unsampled.
    std::set<std::string> known_keys;
    std::visit(
        [&](const auto& sample) {
            using T = std::decay_t<decltype(sample)>;
            if constexpr (std::is_same_v<T, PrioritySample> ||
                          std::is_same_v<T, ThresholdSample>) {
                for (const auto& entry : sample.entries)
                    for (const auto& [key, value] : entry.item.attributes)
                        known_keys.insert(key);
            } else if constexpr (std::is_same_v<T, UniformSample>) {
                for (const auto& entry : sample.entries)
                    for (const auto& [key, value] : entry.attributes)
                        known_keys.insert(key);
            } else {
                for (const auto& entry : sample.slot_items)
                    for (const auto& [key, value] : entry.attributes)
                        known_keys.insert(key);
            }
        },
        persisted.sample);
    for (const auto& [key, value] : predicate.attribute_equals) {
        if (!known_keys.count(key))
            std::cerr << "warning: attribute key '" << key
                      << "' not present in any sampled record; the subset may be real "
                         "but unsampled\n";
    }

    WwrEstimator mode =
        args.mode == "count" ? WwrEstimator::duplicate_count : WwrEstimator::presence;
    EstimateReport report = std::visit(
        [&](const auto& sample) {
            using T = std::decay_t<decltype(sample)>;
            if constexpr (std::is_same_v<T, WeightedSample>)
                return subset_estimate(sample, predicate, mode);
            else
                return subset_estimate(sample, predicate);
        },
        persisted.sample);

    std::cout.precision(17);
    if (args.as_csv) {
        std::cout << "id,weight_estimate,variance_estimate\n";
        for (const auto& c : report.contributions)
            std::cout << c.id << ',' << c.weight_estimate << ',' << c.variance_estimate << '\n';
        std::cout << "total," << report.estimate << ',' << report.variance_estimate << '\n';
    } else {
        std::cout << report_to_json(report).dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_verify(const VerifyArgs& args) {
    VerificationReport report;
    if (args.suite == "identities") {
        report = identity_suite(args.trials, args.seed);
    } else if (args.suite == "closed-forms") {
        report = closed_forms_suite(args.trials, args.seed);
    } else if (args.suite == "oracle") {
        report = oracle_suite(args.trials, args.seed);
    } else if (args.suite == "exactify") {
        report = exactify_suite(args.trials, args.seed);
    } else if (args.suite == "conjecture") {
        report = conjecture_suite(args.trials, args.seed);
    } else {
        std::cerr << "verify: unknown suite '" << args.suite << "'\n";
        return kExitUsage;
    }

    std::cout.precision(17);
    std::cout << "status,check,estimate,target,std_error,tolerance\n";
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "PASS" : "FAIL") << ",\"" << check.name << "\","
                  << check.estimate << ',' << check.target << ',' << check.std_error << ','
                  << check.tolerance << '\n';
    }
    std::size_t failed = 0;
    for (const auto& check : report.checks)
        failed += !check.pass;
    std::cout << "summary: " << report.checks.size() - failed << "/" << report.checks.size()
              << " checks passed\n";
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const CompareArgs& args) {
    Trace trace = generate_trace(resolve_trace_spec(args.synthetic));

    ComparisonSpec spec;
    spec.schemes.clear();
    for (const std::string& name : split_list(args.schemes, ','))
        spec.schemes.push_back(parse_scheme(name));
    for (const std::string& k : split_list(args.k_grid, ','))
        spec.k_grid.push_back(static_cast<std::size_t>(std::stoull(k)));
    if (spec.k_grid.empty()) {
        std::cerr << "compare: --k-grid is required (e.g. 25,50,100)\n";
        return kExitUsage;
    }
    spec.replicates = args.replicates;
    spec.seed = args.seed;

    if (args.subsets.empty()) {
        // Default: one subset per application label present in the trace.
        for (const auto& [label, stat] : trace.summary.labels) {
            LabeledPredicate lp;
            lp.label = "app=" + label;
            lp.predicate.attribute_equals = {{"app", label}};
            spec.subsets.push_back(std::move(lp));
        }
    } else {
        for (const std::string& text : args.subsets) {
            LabeledPredicate lp;
            lp.label = text;
            lp.predicate = parse_predicate(split_list(text, ','), "");
            spec.subsets.push_back(std::move(lp));
        }
    }

    bool has_matrix_attrs =
        !trace.items.empty() && trace.items.front().attributes.count("in") &&
        trace.items.front().attributes.count("out");
    spec.matrix = has_matrix_attrs && !args.no_matrix;

    ComparisonResult result = run_comparison(trace, spec);

    auto write_file = [&](const std::string& suffix, auto&& writer) {
        std::string path = args.out + suffix;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open for writing: " + path);
        writer(out);
        std::cout << "wrote " << path << "\n";
    };
    write_file("subsets.csv",
               [&](std::ostream& out) { write_comparison_csv(out, result.rows); });
    write_file("distinct.csv",
               [&](std::ostream& out) { write_distinct_csv(out, result.distinct); });
    if (spec.matrix)
        write_file("matrix.csv",
                   [&](std::ostream& out) { write_matrix_csv(out, result.matrix); });
    std::cout << "replicates=" << spec.replicates << " subset_rows=" << result.rows.size()
              << " distinct_rows=" << result.distinct.size() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"streaming weighted samples with retroactive subset-sum estimates"};
    app.require_subcommand(1);

    SampleArgs sample_args;
    CLI::App* sample = app.add_subcommand(
        "sample", "stream a weighted input once and persist a fixed-size sample");
    sample->add_option("--input", sample_args.input, "flow-record CSV (header: id,weight,...)");
    sample->add_option("--synthetic", sample_args.synthetic,
                       "synthetic trace spec, e.g. gateway:n=10000 or unit:n=100");
    sample->add_option("--scheme", sample_args.scheme, "pri|pri-relaxed|thr|uwr|wwr")
        ->default_val("pri");
    sample->add_option("--k", sample_args.k, "sample size (expected size for thr)")
        ->required()
        ->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_args.seed, "randomization seed")->default_val(1);
    sample->add_option("--out", sample_args.out, "output sample JSON path")->required();

    EstimateArgs estimate_args;
    CLI::App* estimate = app.add_subcommand(
        "estimate", "answer a subset-sum query against a persisted sample");
    estimate->add_option("--sample", estimate_args.sample_path, "persisted sample JSON")
        ->required();
    estimate->add_option("--where", estimate_args.where,
                         "attribute equality, key=value (repeatable, conjunctive)");
    estimate->add_option("--weight-range", estimate_args.weight_range,
                         "inclusive weight range lo:hi (either side optional)");
    estimate->add_option("--mode", estimate_args.mode,
                         "wwr estimator: presence|count")
        ->default_val("presence");
    estimate->add_flag("--csv", estimate_args.as_csv, "CSV output instead of JSON");

    VerifyArgs verify_args;
    CLI::App* verify = app.add_subcommand(
        "verify", "run a statistical verification suite (nonzero exit on failure)");
    verify->add_option("--suite", verify_args.suite,
                       "identities|closed-forms|oracle|exactify|conjecture")
        ->required();
    verify->add_option("--trials", verify_args.trials,
                       "Monte Carlo trials (vector count for exactify)")
        ->default_val(1'000'000);
    verify->add_option("--seed", verify_args.seed, "suite seed")->default_val(1);

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand(
        "compare", "estimate subsets across schemes and sample sizes; emit CSVs");
    compare->add_option("--synthetic", compare_args.synthetic, "synthetic trace spec")
        ->required();
    compare->add_option("--schemes", compare_args.schemes, "comma list of pri,thr,uwr,wwr")
        ->default_val("pri,thr,uwr,wwr");
    compare->add_option("--k-grid", compare_args.k_grid, "comma list of sample sizes")
        ->required();
    compare->add_option("--replicates", compare_args.replicates, "independent replicates")
        ->default_val(100);
    compare->add_option("--seed", compare_args.seed, "experiment seed")->default_val(1);
    compare->add_option("--out", compare_args.out, "output path prefix")->required();
    compare->add_flag("--no-matrix", compare_args.no_matrix,
                      "skip the 8x8 interface matrix aggregation");
    compare->add_option("--subset", compare_args.subsets,
                        "extra subset as key=value[,key=value...] (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sample->parsed())
            return cmd_sample(sample_args);
        if (estimate->parsed())
            return cmd_estimate(estimate_args);
        if (verify->parsed())
            return cmd_verify(verify_args);
        if (compare->parsed())
            return cmd_compare(compare_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
