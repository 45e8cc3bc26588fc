#include "priosample/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace priosample {

TraceSpec gateway_mix_spec(std::size_t n, std::uint64_t seed) {
    MixLaw law;
    law.n = n;
    law.total_bytes = 4e9;
    law.labels = {
        {"ftp", 0.0085, 0.7960, 40.0, 3.4e9, 1.10, 0.9935},
        {"web", 0.0908, 0.0190, 40.0, 3.2e6, 1.10, 0.0},
        {"dns", 0.4758, 0.0009, 40.0, 6.3e5, 1.30, 0.0},
        {"other", 0.4249, 0.1841, 28.0, 1.0e8, 1.10, 0.0},
    };
    TraceSpec spec;
    spec.law = law;
    spec.seed = seed;
    spec.matrix_attributes = true;
    return spec;
}

namespace {

double truncated_pareto(double lo, double hi, double shape, double u) {
    // Inverse CDF of a Pareto(shape) restricted to [lo, hi].
    double ratio = std::pow(lo / hi, shape);
    return lo / std::pow(1.0 - u * (1.0 - ratio), 1.0 / shape);
}

void append_matrix_attributes(ItemRecord& item, SeededGenerator& gen) {
    item.attributes["in"] = std::to_string(gen.next_below(8));
    item.attributes["out"] = std::to_string(gen.next_below(8));
}

std::vector<ItemRecord> make_mix_items(const MixLaw& law, SeededGenerator& gen) {
    double prop_sum = 0.0;
    double share_sum = 0.0;
    for (const auto& label : law.labels) {
        if (label.flow_fraction < 0.0 || label.byte_share < 0.0)
            throw std::invalid_argument("trace mix: negative proportion");
        if (!(label.lo > 0.0) || label.hi < label.lo || !(label.shape > 0.0))
            throw std::invalid_argument("trace mix: bad size bounds for label " + label.name);
        if (label.planted_fraction < 0.0 || label.planted_fraction >= 1.0)
            throw std::invalid_argument("trace mix: planted fraction outside [0,1)");
        prop_sum += label.flow_fraction;
        share_sum += label.byte_share;
    }
    if (std::abs(prop_sum - 1.0) > 1e-9)
        throw std::invalid_argument("trace mix: flow fractions do not sum to 1");
    if (std::abs(share_sum - 1.0) > 1e-9)
        throw std::invalid_argument("trace mix: byte shares do not sum to 1");
    if (law.labels.empty() || law.n < law.labels.size())
        throw std::invalid_argument("trace mix: need at least one flow per label");

    // Flow counts per label, fixing rounding drift on the last label.
    std::vector<std::size_t> counts(law.labels.size());
    std::size_t assigned = 0;
    for (std::size_t l = 0; l + 1 < law.labels.size(); ++l) {
        counts[l] = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(law.labels[l].flow_fraction * law.n)));
        assigned += counts[l];
    }
    if (assigned + 1 > law.n)
        throw std::invalid_argument("trace mix: flow fractions leave no room for last label");
    counts.back() = law.n - assigned;

    std::vector<ItemRecord> items;
    items.reserve(law.n);
    for (std::size_t l = 0; l < law.labels.size(); ++l) {
        const MixLabel& label = law.labels[l];
        std::vector<double> sizes(counts[l]);
        for (double& s : sizes)
            s = truncated_pareto(label.lo, label.hi, label.shape, gen.next_alpha());
        if (label.planted_fraction > 0.0 && sizes.size() > 1) {
            // The first flow of the label carries planted_fraction of its bytes.
            double rest = std::accumulate(sizes.begin() + 1, sizes.end(), 0.0);
            sizes[0] = label.planted_fraction / (1.0 - label.planted_fraction) * rest;
        }
        double raw_total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
        double scale = label.byte_share * law.total_bytes / raw_total;
        for (double s : sizes) {
            ItemRecord item;
            item.weight = s * scale;
            item.attributes["app"] = label.name;
            items.push_back(std::move(item));
        }
    }

    // Shuffle into a random arrival order.
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[gen.next_below(i)]);
    return items;
}

}  // namespace

Trace generate_trace(const TraceSpec& spec) {
    SeededGenerator gen(spec.seed);
    std::vector<ItemRecord> items;

    if (const auto* unit = std::get_if<UnitLaw>(&spec.law)) {
        items.resize(unit->n);
        for (auto& item : items)
            item.weight = 1.0;
    } else if (const auto* pareto = std::get_if<ParetoLaw>(&spec.law)) {
        if (!(pareto->shape > 0.0) || !(pareto->scale > 0.0))
            throw std::invalid_argument("trace pareto: shape and scale must be positive");
        items.resize(pareto->n);
        for (auto& item : items)
            item.weight = pareto->scale * std::pow(gen.next_alpha(), -1.0 / pareto->shape);
    } else if (const auto* ls = std::get_if<LargeSmallLaw>(&spec.law)) {
        if (!(ls->large_weight > 0.0))
            throw std::invalid_argument("trace large-small: N must be positive");
        items.resize(ls->large_count + ls->small_count);
        for (std::size_t i = 0; i < items.size(); ++i) {
            bool large = i < ls->large_count;
            items[i].weight = large ? ls->large_weight : 1.0;
            items[i].attributes["class"] = large ? "large" : "small";
        }
    } else {
        items = make_mix_items(std::get<MixLaw>(spec.law), gen);
    }

    Trace trace;
    trace.items = std::move(items);
    for (std::size_t i = 0; i < trace.items.size(); ++i) {
        ItemRecord& item = trace.items[i];
        item.id = i;
        if (spec.matrix_attributes)
            append_matrix_attributes(item, gen);
        trace.summary.total_weight += item.weight;
        auto app = item.attributes.find("app");
        if (app != item.attributes.end()) {
            LabelStat& stat = trace.summary.labels[app->second];
            ++stat.flows;
            stat.bytes += item.weight;
        }
    }
    return trace;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    return parts;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> out;
    for (const std::string& part : split(text, ',')) {
        if (part.empty())
            continue;
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("trace spec: expected key=value, got '" + part + "'");
        out[part.substr(0, eq)] = part.substr(eq + 1);
    }
    return out;
}

double need_num(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
        throw std::invalid_argument("trace spec: missing " + key);
    return std::stod(it->second);
}

double num_or(const std::map<std::string, std::string>& kv, const std::string& key,
              double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stod(it->second);
}

}  // namespace

TraceSpec parse_trace_spec(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("trace spec: expected '<law>:<params>'");
    std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);

    std::vector<std::string> segments = split(rest, ';');
    auto kv = parse_kv(segments[0]);

    TraceSpec spec;
    spec.seed = static_cast<std::uint64_t>(num_or(kv, "seed", 0.0));
    if (kind == "unit") {
        spec.law = UnitLaw{static_cast<std::size_t>(need_num(kv, "n"))};
    } else if (kind == "pareto") {
        spec.law = ParetoLaw{static_cast<std::size_t>(need_num(kv, "n")),
                             need_num(kv, "shape"), num_or(kv, "scale", 1.0)};
    } else if (kind == "large-small") {
        spec.law = LargeSmallLaw{static_cast<std::size_t>(need_num(kv, "l")),
                                 need_num(kv, "N"),
                                 static_cast<std::size_t>(need_num(kv, "n"))};
    } else if (kind == "gateway") {
        spec = gateway_mix_spec(static_cast<std::size_t>(need_num(kv, "n")),
                                static_cast<std::uint64_t>(num_or(kv, "seed", 0.0)));
    } else if (kind == "mix") {
        MixLaw law;
        law.n = static_cast<std::size_t>(need_num(kv, "n"));
        law.total_bytes = num_or(kv, "total", 4e9);
        for (std::size_t s = 1; s < segments.size(); ++s) {
            auto colon2 = segments[s].find(':');
            if (colon2 == std::string::npos)
                throw std::invalid_argument("trace spec: label segment needs '<name>:'");
            MixLabel label;
            label.name = segments[s].substr(0, colon2);
            auto lkv = parse_kv(segments[s].substr(colon2 + 1));
            label.flow_fraction = need_num(lkv, "prop");
            label.byte_share = need_num(lkv, "share");
            label.lo = num_or(lkv, "lo", 1.0);
            label.hi = num_or(lkv, "hi", 1e6);
            label.shape = num_or(lkv, "shape", 1.1);
            label.planted_fraction = num_or(lkv, "planted", 0.0);
            law.labels.push_back(std::move(label));
        }
        spec.law = std::move(law);
        spec.matrix_attributes = true;
    } else {
        throw std::invalid_argument("trace spec: unknown law '" + kind + "'");
    }
    return spec;
}

}  // namespace priosample
