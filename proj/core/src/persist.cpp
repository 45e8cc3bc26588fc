#include "priosample/persist.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace priosample {

namespace {

using nlohmann::json;

json item_to_json(const ItemRecord& item) {
    json j;
    j["id"] = item.id;
    j["weight"] = item.weight;
    if (!item.attributes.empty())
        j["attributes"] = item.attributes;
    if (item.secondary)
        j["secondary"] = *item.secondary;
    return j;
}

ItemRecord item_from_json(const json& j) {
    ItemRecord item;
    item.id = j.at("id").get<std::uint64_t>();
    item.weight = j.at("weight").get<double>();
    if (j.contains("attributes"))
        item.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    if (j.contains("secondary"))
        item.secondary = j.at("secondary").get<double>();
    return item;
}

PrioritizedItem prioritized_from_json(const json& j) {
    PrioritizedItem entry;
    entry.item = item_from_json(j);
    entry.priority = j.at("priority").get<double>();
    // Alpha is implied by weight/priority; it is not used by estimators.
    entry.alpha = entry.item.weight > 0.0 && entry.priority > entry.item.weight
                      ? entry.item.weight / entry.priority
                      : 0.5;
    return entry;
}

}  // namespace

std::size_t PersistedSample::k() const {
    return std::visit([](const auto& s) { return s.k; }, sample);
}

std::uint64_t PersistedSample::items_seen() const {
    return std::visit([](const auto& s) { return s.items_seen; }, sample);
}

std::size_t PersistedSample::distinct_items() const {
    if (const auto* wwr = std::get_if<WeightedSample>(&sample)) {
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < wwr->slot_items.size();) {
            std::size_t j = i;
            while (j < wwr->slot_items.size() && wwr->slot_items[j].id == wwr->slot_items[i].id)
                ++j;
            ++distinct;
            i = j;
        }
        return distinct;
    }
    return std::visit(
        [](const auto& s) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, WeightedSample>)
                return 0;  // handled above
            else
                return s.entries.size();
        },
        sample);
}

double PersistedSample::threshold() const {
    if (const auto* pri = std::get_if<PrioritySample>(&sample))
        return pri->threshold;
    if (const auto* thr = std::get_if<ThresholdSample>(&sample))
        return thr->threshold;
    return 0.0;
}

void save_sample(std::ostream& out, const PersistedSample& persisted) {
    json j;
    j["format_version"] = persisted.format_version;
    j["scheme"] = std::string(to_string(persisted.scheme));
    j["seed"] = persisted.seed;
    j["k"] = persisted.k();
    j["items_seen"] = persisted.items_seen();

    json items = json::array();
    if (const auto* pri = std::get_if<PrioritySample>(&persisted.sample)) {
        j["threshold"] = pri->threshold;
        for (const auto& entry : pri->entries) {
            json ij = item_to_json(entry.item);
            ij["priority"] = entry.priority;
            items.push_back(std::move(ij));
        }
    } else if (const auto* thr = std::get_if<ThresholdSample>(&persisted.sample)) {
        j["threshold"] = thr->threshold;
        for (const auto& entry : thr->entries) {
            json ij = item_to_json(entry.item);
            ij["priority"] = entry.priority;
            items.push_back(std::move(ij));
        }
    } else if (const auto* uwr = std::get_if<UniformSample>(&persisted.sample)) {
        for (const auto& entry : uwr->entries)
            items.push_back(item_to_json(entry));
    } else if (const auto* wwr = std::get_if<WeightedSample>(&persisted.sample)) {
        j["total_weight"] = wwr->total_weight;
        for (std::size_t i = 0; i < wwr->slot_items.size();) {
            std::size_t run = i;
            while (run < wwr->slot_items.size() &&
                   wwr->slot_items[run].id == wwr->slot_items[i].id)
                ++run;
            json ij = item_to_json(wwr->slot_items[i]);
            ij["slot_count"] = run - i;
            items.push_back(std::move(ij));
            i = run;
        }
    }
    j["items"] = std::move(items);
    out << j.dump(2) << '\n';
}

PersistedSample load_sample(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("sample file is not valid JSON: ") + e.what());
    }
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw std::runtime_error("sample file: unsupported format_version");

    PersistedSample persisted;
    persisted.scheme = parse_scheme(j.at("scheme").get<std::string>());
    persisted.seed = j.value("seed", std::uint64_t{0});
    std::size_t k = j.at("k").get<std::size_t>();
    std::uint64_t items_seen = j.at("items_seen").get<std::uint64_t>();
    const json& items = j.at("items");

    switch (persisted.scheme) {
        case SchemeTag::pri: {
            PrioritySample sample;
            sample.k = k;
            sample.items_seen = items_seen;
            sample.threshold = j.value("threshold", 0.0);
            for (const auto& ij : items)
                sample.entries.push_back(prioritized_from_json(ij));
            persisted.sample = std::move(sample);
            break;
        }
        case SchemeTag::thr: {
            ThresholdSample sample;
            sample.k = k;
            sample.items_seen = items_seen;
            sample.threshold = j.value("threshold", 0.0);
            for (const auto& ij : items)
                sample.entries.push_back(prioritized_from_json(ij));
            persisted.sample = std::move(sample);
            break;
        }
        case SchemeTag::uwr: {
            UniformSample sample;
            sample.k = k;
            sample.items_seen = items_seen;
            for (const auto& ij : items)
                sample.entries.push_back(item_from_json(ij));
            persisted.sample = std::move(sample);
            break;
        }
        case SchemeTag::wwr: {
            WeightedSample sample;
            sample.k = k;
            sample.items_seen = items_seen;
            sample.total_weight = j.value("total_weight", 0.0);
            for (const auto& ij : items) {
                ItemRecord item = item_from_json(ij);
                std::size_t count = ij.value("slot_count", std::size_t{1});
                for (std::size_t c = 0; c < count; ++c)
                    sample.slot_items.push_back(item);
            }
            persisted.sample = std::move(sample);
            break;
        }
    }
    return persisted;
}

void save_sample_file(const std::string& path, const PersistedSample& persisted) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    save_sample(out, persisted);
}

PersistedSample load_sample_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open sample file: " + path);
    return load_sample(in);
}

}  // namespace priosample
