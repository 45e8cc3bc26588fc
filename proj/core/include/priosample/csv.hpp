#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "priosample/item.hpp"

namespace priosample {

/// Single-pass reader for flow-record CSV. The header row is mandatory and
/// must contain `id` and `weight`; a `secondary` column is parsed as the
/// optional secondary value, every other column becomes an attribute. Errors
/// name the 1-based line number. The reader counts delivered rows, so a
/// caller can assert the stream was consumed exactly once.
class FlowRecordReader {
public:
    explicit FlowRecordReader(std::istream& in);

    /// Next record, or nullopt at end of input.
    std::optional<ItemRecord> next();

    std::uint64_t rows_delivered() const { return rows_delivered_; }
    const std::vector<std::string>& columns() const { return columns_; }

private:
    std::istream& in_;
    std::vector<std::string> columns_;
    std::size_t id_column_ = 0;
    std::size_t weight_column_ = 0;
    std::size_t secondary_column_ = SIZE_MAX;
    std::uint64_t line_ = 1;
    std::uint64_t rows_delivered_ = 0;
    bool has_previous_id_ = false;
    std::uint64_t previous_id_ = 0;
};

/// Writes items in the same CSV contract (attribute columns unioned from the
/// first record).
void write_flow_csv(std::ostream& out, const std::vector<ItemRecord>& items);

}  // namespace priosample
