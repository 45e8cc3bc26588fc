#include "priosample/csv.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace priosample {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

[[noreturn]] void fail(std::uint64_t line, const std::string& message) {
    std::ostringstream out;
    out << "csv line " << line << ": " << message;
    throw std::runtime_error(out.str());
}

}  // namespace

FlowRecordReader::FlowRecordReader(std::istream& in) : in_(in) {
    std::string header;
    if (!std::getline(in_, header))
        fail(1, "missing header row");
    columns_ = split_row(header);
    auto find_column = [&](const std::string& name) {
        auto it = std::find(columns_.begin(), columns_.end(), name);
        return it == columns_.end() ? SIZE_MAX
                                    : static_cast<std::size_t>(it - columns_.begin());
    };
    id_column_ = find_column("id");
    weight_column_ = find_column("weight");
    secondary_column_ = find_column("secondary");
    if (id_column_ == SIZE_MAX || weight_column_ == SIZE_MAX)
        fail(1, "header must contain 'id' and 'weight' columns");
}

std::optional<ItemRecord> FlowRecordReader::next() {
    std::string line;
    for (;;) {
        if (!std::getline(in_, line))
            return std::nullopt;
        ++line_;
        if (!line.empty() && line != "\r")
            break;
    }
    std::vector<std::string> fields = split_row(line);
    if (fields.size() != columns_.size())
        fail(line_, "expected " + std::to_string(columns_.size()) + " fields, got " +
                        std::to_string(fields.size()));

    ItemRecord item;
    try {
        item.id = std::stoull(fields[id_column_]);
    } catch (const std::exception&) {
        fail(line_, "bad id '" + fields[id_column_] + "'");
    }
    if (has_previous_id_ && item.id <= previous_id_)
        fail(line_, "ids must be strictly increasing");
    has_previous_id_ = true;
    previous_id_ = item.id;

    try {
        item.weight = std::stod(fields[weight_column_]);
    } catch (const std::exception&) {
        fail(line_, "bad weight '" + fields[weight_column_] + "'");
    }
    if (item.weight < 0.0)
        fail(line_, "negative weight; store the signed value in a 'secondary' column and "
                    "use its absolute value as the weight");
    if (secondary_column_ != SIZE_MAX && !fields[secondary_column_].empty()) {
        try {
            item.secondary = std::stod(fields[secondary_column_]);
        } catch (const std::exception&) {
            fail(line_, "bad secondary '" + fields[secondary_column_] + "'");
        }
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c == id_column_ || c == weight_column_ || c == secondary_column_)
            continue;
        item.attributes[columns_[c]] = fields[c];
    }
    ++rows_delivered_;
    return item;
}

void write_flow_csv(std::ostream& out, const std::vector<ItemRecord>& items) {
    out.precision(17);
    std::vector<std::string> attribute_columns;
    if (!items.empty()) {
        for (const auto& [key, value] : items.front().attributes)
            attribute_columns.push_back(key);
    }
    bool any_secondary =
        std::any_of(items.begin(), items.end(),
                    [](const ItemRecord& item) { return item.secondary.has_value(); });
    out << "id,weight";
    for (const auto& column : attribute_columns)
        out << ',' << column;
    if (any_secondary)
        out << ",secondary";
    out << '\n';
    for (const auto& item : items) {
        out << item.id << ',' << item.weight;
        for (const auto& column : attribute_columns) {
            auto it = item.attributes.find(column);
            out << ',' << (it == item.attributes.end() ? "" : it->second);
        }
        if (any_secondary)
            out << ',' << (item.secondary ? std::to_string(*item.secondary) : std::string());
        out << '\n';
    }
}

}  // namespace priosample
