#include "crisis/aggregate.hpp"

#include "crisis/error.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace crisis {

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    for (const double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
    if (xs.size() > 1) m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return m;
}

std::vector<std::string> ordered_labels(std::span<const RunRecord> records) {
    std::vector<std::string> out;
    for (const auto id : all_strategies()) {
        const std::string name(to_string(id));
        if (std::any_of(records.begin(), records.end(), [&](const RunRecord& r) { return r.label == name; }))
            out.push_back(name);
    }
    for (const auto& r : records)
        if (std::find(out.begin(), out.end(), r.label) == out.end()) out.push_back(r.label);
    return out;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    throw Error("CSV field contains a separator: " + s);
}

}  // namespace

const CellStats* AggregateTable::cell(const std::string& strategy, std::size_t budget) const {
    const auto si = std::find(strategies.begin(), strategies.end(), strategy);
    const auto bi = std::find(budgets.begin(), budgets.end(), budget);
    if (si == strategies.end() || bi == budgets.end()) return nullptr;
    const auto& c = cells[static_cast<std::size_t>(si - strategies.begin())][static_cast<std::size_t>(bi - budgets.begin())];
    return c ? &*c : nullptr;
}

AggregateTable aggregate(std::span<const RunRecord> records) {
    AggregateTable t;
    t.strategies = ordered_labels(records);
    std::set<std::size_t> budgets;
    for (const auto& r : records) budgets.insert(r.budget);
    t.budgets.assign(budgets.begin(), budgets.end());
    t.cells.assign(t.strategies.size(), std::vector<std::optional<CellStats>>(t.budgets.size()));

    for (std::size_t s = 0; s < t.strategies.size(); ++s) {
        for (std::size_t b = 0; b < t.budgets.size(); ++b) {
            std::vector<double> f1, ece;
            for (const auto& r : records) {
                if (r.label != t.strategies[s] || r.budget != t.budgets[b]) continue;
                f1.push_back(r.test.macro_f1);
                ece.push_back(r.test.ece);
            }
            if (f1.empty()) continue;
            const auto mf = moments(f1);
            const auto me = moments(ece);
            t.cells[s][b] = CellStats{mf.mean, mf.std, me.mean, me.std, f1.size(), false, false};
        }
    }
    for (std::size_t b = 0; b < t.budgets.size(); ++b) {
        double best_f1 = -1.0, best_ece = 2.0;
        for (const auto& row : t.cells) {
            if (!row[b]) continue;
            best_f1 = std::max(best_f1, row[b]->f1_mean);
            best_ece = std::min(best_ece, row[b]->ece_mean);
        }
        for (auto& row : t.cells) {
            if (!row[b]) continue;
            row[b]->best_f1 = row[b]->f1_mean == best_f1;
            row[b]->best_ece = row[b]->ece_mean == best_ece;
        }
    }
    return t;
}

std::string render_table(const AggregateTable& t) {
    auto cell_text = [](const std::optional<CellStats>& c, bool f1) -> std::string {
        if (!c) return "-";
        const double mean = f1 ? c->f1_mean : c->ece_mean;
        const double sd = f1 ? c->f1_std : c->ece_std;
        const bool best = f1 ? c->best_f1 : c->best_ece;
        return fixed3(mean) + " +/- " + fixed3(sd) + (best ? " *" : "  ");
    };

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"Method"};
    for (const auto b : t.budgets) header.push_back("F1 " + std::to_string(b) + " lb/cl");
    for (const auto b : t.budgets) header.push_back("ECE " + std::to_string(b) + " lb/cl");
    rows.push_back(header);
    for (std::size_t s = 0; s < t.strategies.size(); ++s) {
        std::vector<std::string> row{t.strategies[s]};
        for (std::size_t b = 0; b < t.budgets.size(); ++b) row.push_back(cell_text(t.cells[s][b], true));
        for (std::size_t b = 0; b < t.budgets.size(); ++b) row.push_back(cell_text(t.cells[s][b], false));
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) out << (c == 1 || c == 1 + t.budgets.size() ? " | " : "  ");
            out << rows[r][c] << std::string(width[c] - rows[r][c].size(), ' ');
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
            out << std::string(total + 2, '-') << '\n';
        }
    }
    return out.str();
}

std::string aggregate_to_json(const AggregateTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t s = 0; s < t.strategies.size(); ++s) {
        nlohmann::json cells = nlohmann::json::object();
        for (std::size_t b = 0; b < t.budgets.size(); ++b) {
            const auto& c = t.cells[s][b];
            if (!c) continue;
            cells[std::to_string(t.budgets[b])] = {{"f1_mean", c->f1_mean}, {"f1_std", c->f1_std},
                                                  {"ece_mean", c->ece_mean}, {"ece_std", c->ece_std},
                                                  {"count", c->count},     {"best_f1", c->best_f1},
                                                  {"best_ece", c->best_ece}};
        }
        rows.push_back({{"strategy", t.strategies[s]}, {"cells", cells}});
    }
    return nlohmann::json{{"budgets", t.budgets}, {"rows", rows}}.dump(2);
}

std::string EventGrid::to_csv() const {
    std::ostringstream out;
    out << "method";
    for (const auto& e : events) out << ',' << csv_field(e);
    out << '\n';
    for (std::size_t m = 0; m < methods.size(); ++m) {
        out << csv_field(methods[m]);
        for (std::size_t e = 0; e < events.size(); ++e) {
            out << ',';
            if (values[m][e]) out << fixed3(*values[m][e]);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<EventGrid> export_event_grid(std::span<const RunRecord> records) {
    const auto methods = ordered_labels(records);
    std::vector<std::string> events;
    std::set<std::size_t> budgets;
    for (const auto& r : records) {
        if (std::find(events.begin(), events.end(), r.event_name) == events.end()) events.push_back(r.event_name);
        budgets.insert(r.budget);
    }
    std::vector<EventGrid> grids;
    for (const auto b : budgets) {
        EventGrid g;
        g.budget = b;
        g.methods = methods;
        g.events = events;
        g.values.assign(methods.size(), std::vector<std::optional<double>>(events.size()));
        for (std::size_t m = 0; m < methods.size(); ++m) {
            for (std::size_t e = 0; e < events.size(); ++e) {
                double sum = 0.0;
                std::size_t n = 0;
                for (const auto& r : records) {
                    if (r.budget == b && r.label == methods[m] && r.event_name == events[e]) {
                        sum += r.test.macro_f1;
                        ++n;
                    }
                }
                if (n) g.values[m][e] = sum / static_cast<double>(n);
            }
        }
        grids.push_back(std::move(g));
    }
    return grids;
}

EventGrid parse_event_grid_csv(const std::string& csv, std::size_t budget) {
    EventGrid g;
    g.budget = budget;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty event grid CSV");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "method") throw ParseError("event grid CSV must start with 'method'");
    g.events.assign(header.begin() + 1, header.end());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("event grid CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields");
        g.methods.push_back(fields[0]);
        std::vector<std::optional<double>> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].empty()) {
                row.emplace_back();
                continue;
            }
            try {
                row.emplace_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw ParseError("event grid CSV line " + std::to_string(line_no) + ": bad number '" + fields[i] +
                                 "'");
            }
        }
        g.values.push_back(std::move(row));
    }
    return g;
}

std::vector<AblationRow> ablation_rows(std::span<const RunRecord> records, const std::string& a, const std::string& b,
                                       std::size_t budget) {
    std::vector<std::string> events;
    for (const auto& r : records)
        if (r.budget == budget && (r.label == a || r.label == b) &&
            std::find(events.begin(), events.end(), r.event_name) == events.end())
            events.push_back(r.event_name);

    auto mean_for = [&](const std::string& label, const std::string& event) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : records)
            if (r.budget == budget && r.label == label && r.event_name == event) {
                sum += r.test.macro_f1;
                ++n;
            }
        if (!n) return std::nullopt;
        return sum / static_cast<double>(n);
    };

    std::vector<AblationRow> rows;
    double sa = 0.0, sb = 0.0;
    for (const auto& e : events) {
        const auto va = mean_for(a, e);
        const auto vb = mean_for(b, e);
        if (!va || !vb) continue;
        rows.push_back({e, *va, *vb, *va - *vb});
        sa += *va;
        sb += *vb;
    }
    if (!rows.empty()) {
        const auto n = static_cast<double>(rows.size());
        rows.push_back({"Average", sa / n, sb / n, (sa - sb) / n});
    }
    return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows, const std::string& a, const std::string& b) {
    std::ostringstream out;
    out << "event," << csv_field(a) << ',' << csv_field(b) << ",delta\n";
    for (const auto& r : rows)
        out << csv_field(r.event) << ',' << fixed3(r.a) << ',' << fixed3(r.b) << ',' << fixed3(r.delta) << '\n';
    return out.str();
}

}  // namespace crisis
