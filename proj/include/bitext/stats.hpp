#pragma once

#include <algorithm>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bitext/core.hpp"

namespace bitext {

enum class StatsGroupBy { dataset, lang_pair };

// Before/after survivor counts per dataset and language pair, in the layout
// of a before/after cleaning table: one row per dataset, one column pair per
// language pair, plus a TOTAL row.
struct PipelineStats {
    std::vector<std::string> datasets;    // row order
    std::vector<std::string> lang_pairs;  // column order, "xx-yy" normalized
    // (dataset, lang_pair) -> counts
    std::map<std::pair<std::string, std::string>, std::pair<std::int64_t, std::int64_t>>
        cells;

    std::pair<std::int64_t, std::int64_t> total(const std::string& lang_pair) const {
        std::int64_t b = 0, a = 0;
        for (const auto& [key, val] : cells)
            if (key.second == lang_pair) { b += val.first; a += val.second; }
        return {b, a};
    }
};

namespace detail {

// direction-insensitive pair key, lexicographic
inline std::string lang_pair_key(const SentencePair& p) {
    std::string a = p.src.lang.code, b = p.tgt.lang.code;
    if (b < a) std::swap(a, b);
    return a + "-" + b;
}

}  // namespace detail

inline PipelineStats stats_report(const std::vector<SentencePair>& before,
                                  const std::vector<SentencePair>& after) {
    std::set<std::int64_t> before_ids, after_ids;
    for (const auto& p : before) before_ids.insert(p.id);
    for (const auto& p : after) {
        after_ids.insert(p.id);
        if (!before_ids.count(p.id))
            throw std::invalid_argument("after-corpus pair " + std::to_string(p.id) +
                                        " is not in the before-corpus");
    }

    PipelineStats stats;
    for (const auto& p : before) {
        std::string ds = p.src.origin;
        std::string lp = detail::lang_pair_key(p);
        if (std::find(stats.datasets.begin(), stats.datasets.end(), ds) ==
            stats.datasets.end())
            stats.datasets.push_back(ds);
        if (std::find(stats.lang_pairs.begin(), stats.lang_pairs.end(), lp) ==
            stats.lang_pairs.end())
            stats.lang_pairs.push_back(lp);
        auto& cell = stats.cells[{ds, lp}];
        ++cell.first;
        if (after_ids.count(p.id)) ++cell.second;
    }
    return stats;
}

inline std::string render_stats(const PipelineStats& stats) {
    std::ostringstream out;
    std::size_t name_w = 7;  // "Dataset"
    for (const auto& d : stats.datasets) name_w = std::max(name_w, d.size());

    auto cell_w = [&](const std::string& lp) { return std::max<std::size_t>(lp.size(), 11); };

    out << std::left << std::setw(static_cast<int>(name_w)) << "Dataset";
    for (const auto& lp : stats.lang_pairs)
        out << "  " << std::setw(static_cast<int>(cell_w(lp))) << lp;
    out << '\n';

    auto row = [&](const std::string& name,
                   const std::function<std::pair<std::int64_t, std::int64_t>(
                       const std::string&)>& get) {
        out << std::left << std::setw(static_cast<int>(name_w)) << name;
        for (const auto& lp : stats.lang_pairs) {
            auto [b, a] = get(lp);
            std::ostringstream c;
            c << b << " -> " << a;
            out << "  " << std::setw(static_cast<int>(cell_w(lp))) << c.str();
        }
        out << '\n';
    };

    for (const auto& d : stats.datasets)
        row(d, [&](const std::string& lp) -> std::pair<std::int64_t, std::int64_t> {
            auto it = stats.cells.find({d, lp});
            return it == stats.cells.end() ? std::pair<std::int64_t, std::int64_t>{0, 0}
                                           : it->second;
        });
    row("TOTAL", [&](const std::string& lp) { return stats.total(lp); });
    return out.str();
}

}  // namespace bitext
