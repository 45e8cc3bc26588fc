#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace priosample {

/// The four sampling schemes compared throughout: priority sampling,
/// threshold sampling, uniform without replacement, weighted with
/// replacement.
enum class SchemeTag { pri, thr, uwr, wwr };

/// Weighted-with-replacement admits two unbiased weight estimators: scale by
/// presence probability (lower variance) or count slot duplicates.
enum class WwrEstimator { presence, duplicate_count };

inline std::string_view to_string(SchemeTag tag) {
    switch (tag) {
        case SchemeTag::pri: return "pri";
        case SchemeTag::thr: return "thr";
        case SchemeTag::uwr: return "uwr";
        case SchemeTag::wwr: return "wwr";
    }
    return "?";
}

inline SchemeTag parse_scheme(std::string_view text) {
    if (text == "pri") return SchemeTag::pri;
    if (text == "thr") return SchemeTag::thr;
    if (text == "uwr") return SchemeTag::uwr;
    if (text == "wwr") return SchemeTag::wwr;
    throw std::invalid_argument("unknown scheme: " + std::string(text));
}

}  // namespace priosample
