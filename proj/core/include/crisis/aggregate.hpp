#pragma once

#include "crisis/strategies.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crisis {

struct CellStats {
    double f1_mean = 0.0;
    double f1_std = 0.0;  // sample (n-1); 0 for a single run
    double ece_mean = 0.0;
    double ece_std = 0.0;
    std::size_t count = 0;
    bool best_f1 = false;   // highest mean Macro-F1 in its budget column
    bool best_ece = false;  // lowest mean ECE in its budget column
};

/// Rows are strategy labels, columns budgets; each cell pools test metrics
/// over every (event, seed) record of that strategy and budget.
struct AggregateTable {
    std::vector<std::string> strategies;
    std::vector<std::size_t> budgets;
    std::vector<std::vector<std::optional<CellStats>>> cells;  // [strategy][budget]

    const CellStats* cell(const std::string& strategy, std::size_t budget) const;
};

// Rows follow the built-in strategy order, then first appearance; budgets ascend.
AggregateTable aggregate(std::span<const RunRecord> records);

// Aligned text: a Macro-F1 block then an ECE block, `*` marking column bests.
std::string render_table(const AggregateTable& table);
std::string aggregate_to_json(const AggregateTable& table);

/// Seed-mean test Macro-F1 per (method, event) for one budget.
struct EventGrid {
    std::size_t budget = 0;
    std::vector<std::string> methods;
    std::vector<std::string> events;
    std::vector<std::vector<std::optional<double>>> values;  // [method][event]

    // `method,<event>...` header; values with 3 decimals, empty when missing.
    std::string to_csv() const;
};

std::vector<EventGrid> export_event_grid(std::span<const RunRecord> records);
EventGrid parse_event_grid_csv(const std::string& csv, std::size_t budget);

/// Per-event comparison of two strategies at one budget with an average row:
/// `event,<a>,<b>,delta` (delta = a - b).
struct AblationRow {
    std::string event;
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
};
std::vector<AblationRow> ablation_rows(std::span<const RunRecord> records, const std::string& a, const std::string& b,
                                       std::size_t budget);
std::string ablation_csv(std::span<const AblationRow> rows, const std::string& a, const std::string& b);

}  // namespace crisis
