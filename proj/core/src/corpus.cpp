#include "crisis/corpus.hpp"

#include "crisis/error.hpp"
#include "crisis/rng.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace crisis {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

}  // namespace

LabelSchema::LabelSchema(std::vector<std::string> categories) : categories_(std::move(categories)) {
    if (categories_.size() < 2) throw ConfigError("label schema needs at least 2 classes");
    std::unordered_set<std::string> seen;
    for (const auto& c : categories_) {
        if (c.empty()) throw ConfigError("label schema contains an empty class name");
        if (c.find_first_of("\t\n\r") != std::string::npos)
            throw ConfigError("class name contains a tab or newline: " + c);
        if (!seen.insert(c).second) throw ConfigError("duplicate class name in schema: " + c);
    }
}

std::optional<std::size_t> LabelSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (categories_[i] == name) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> LabelSchema::match(std::string_view response) const {
    const auto needle = trim(response);
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (iequals(categories_[i], needle)) return i;
    }
    return std::nullopt;
}

LabelSchema humaid_schema() {
    return LabelSchema({
        "Caution and advice",
        "Sympathy and support",
        "Requests or urgent needs",
        "Displaced people and evacuations",
        "Injured or dead people",
        "Missing or found people",
        "Infrastructure and utility damage",
        "Rescue, volunteering, or donation effort",
        "Other relevant information",
        "Not humanitarian",
    });
}

std::vector<std::size_t> EventCorpus::active_classes() const {
    std::vector<std::size_t> active;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        if (class_counts[c] > 0) active.push_back(c);
    }
    return active;
}

std::vector<Example> read_examples(std::istream& in, const LabelSchema& schema, std::string_view source_name) {
    std::vector<Example> out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << source_name << ":" << line_no << ": " << what;
        throw ParseError(msg.str());
    };

    if (!std::getline(in, line)) return out;  // no header at all: treat as empty
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        const auto header = split_tabs(line);
        if (header.size() != 3 || header[0] != "id" || header[1] != "text" || header[2] != "label")
            fail("expected header 'id<TAB>text<TAB>label'");
    }

    std::unordered_set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3) fail("expected 3 tab-separated columns, got " + std::to_string(fields.size()));
        Example ex;
        ex.id = std::string(fields[0]);
        if (ex.id.empty()) fail("empty id");
        if (!ids.insert(ex.id).second) fail("duplicate id '" + ex.id + "'");
        ex.text = std::string(fields[1]);
        if (!fields[2].empty()) {
            const auto idx = schema.index_of(fields[2]);
            if (!idx) fail("unknown label '" + std::string(fields[2]) + "'");
            ex.gold_label = *idx;
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<Example> read_examples(const std::filesystem::path& path, const LabelSchema& schema) {
    auto in = open_input(path);
    return read_examples(in, schema, path.string());
}

void write_examples(std::ostream& out, const std::vector<Example>& examples, const LabelSchema& schema) {
    out << "id\ttext\tlabel\n";
    for (const auto& ex : examples) {
        if (ex.text.find_first_of("\t\n\r") != std::string::npos)
            throw Error("example '" + ex.id + "' text contains a tab or newline");
        out << ex.id << '\t' << ex.text << '\t';
        if (ex.gold_label) out << schema.name(*ex.gold_label);
        out << '\n';
    }
}

void write_examples(const std::filesystem::path& path, const std::vector<Example>& examples,
                    const LabelSchema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_examples(out, examples, schema);
}

std::vector<std::size_t> count_classes(const std::vector<Example>& examples, std::size_t class_count) {
    std::vector<std::size_t> counts(class_count, 0);
    for (const auto& ex : examples) {
        if (ex.gold_label) ++counts.at(*ex.gold_label);
    }
    return counts;
}

EventCorpus load_corpus(const std::filesystem::path& path, const LabelSchema& schema) {
    return load_event(path.stem().string(), schema, path, std::nullopt, std::nullopt);
}

EventCorpus load_event(std::string event_name, const LabelSchema& schema, const std::filesystem::path& train,
                       const std::optional<std::filesystem::path>& val,
                       const std::optional<std::filesystem::path>& test) {
    EventCorpus corpus{std::move(event_name), schema, {}, {}, {}, {}};
    corpus.train = read_examples(train, schema);
    for (const auto& ex : corpus.train) {
        if (!ex.gold_label) throw ParseError(train.string() + ": train example '" + ex.id + "' has no label");
    }
    if (val) corpus.val = read_examples(*val, schema);
    if (test) corpus.test = read_examples(*test, schema);
    corpus.class_counts = count_classes(corpus.train, schema.size());
    return corpus;
}

EventCorpus make_event(std::string event_name, const LabelSchema& schema, std::vector<Example> train,
                       std::vector<Example> val, std::vector<Example> test) {
    for (const auto& ex : train) {
        if (!ex.gold_label) throw ConfigError("train example '" + ex.id + "' has no label");
        if (*ex.gold_label >= schema.size()) throw ConfigError("train example '" + ex.id + "' has an unknown label");
    }
    EventCorpus corpus{std::move(event_name), schema, std::move(train), std::move(val), std::move(test), {}};
    corpus.class_counts = count_classes(corpus.train, schema.size());
    return corpus;
}

SplitPlan make_split_plan(const std::vector<std::size_t>& train_labels, std::size_t class_count,
                          std::size_t budget_k, std::uint64_t seed) {
    if (budget_k < 1) throw ConfigError("labels-per-class budget must be >= 1");
    if (train_labels.empty()) throw ConfigError("cannot split an empty train set");

    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < train_labels.size(); ++i) by_class.at(train_labels[i]).push_back(i);

    SplitPlan plan;
    plan.budget_k = budget_k;
    plan.seed = seed;
    std::vector<bool> is_labeled(train_labels.size(), false);
    Rng rng(seed);
    for (auto& members : by_class) {
        const std::size_t take = std::min(budget_k, members.size());
        // Partial Fisher-Yates: the first `take` slots become the sample.
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
            std::swap(members[i], members[j]);
            is_labeled[members[i]] = true;
        }
    }
    for (std::size_t i = 0; i < train_labels.size(); ++i) {
        (is_labeled[i] ? plan.labeled : plan.unlabeled).push_back(i);
    }
    return plan;
}

SplitPlan make_split_plan(const EventCorpus& corpus, std::size_t budget_k, std::uint64_t seed) {
    std::vector<std::size_t> labels;
    labels.reserve(corpus.train.size());
    for (const auto& ex : corpus.train) {
        if (!ex.gold_label) throw ConfigError("train example '" + ex.id + "' has no gold label");
        labels.push_back(*ex.gold_label);
    }
    return make_split_plan(labels, corpus.schema.size(), budget_k, seed);
}

void write_split_plan(std::ostream& out, const EventCorpus& corpus, const SplitPlan& plan) {
    std::vector<char> tag(corpus.train.size(), 'U');
    for (auto i : plan.labeled) tag.at(i) = 'L';
    for (std::size_t i = 0; i < corpus.train.size(); ++i) out << corpus.train[i].id << '\t' << tag[i] << '\n';
}

SplitPlan read_split_plan(std::istream& in, const EventCorpus& corpus) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.train.size(); ++i) index.emplace(corpus.train[i].id, i);

    SplitPlan plan;
    std::vector<int> seen(corpus.train.size(), 0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 2 || (fields[1] != "L" && fields[1] != "U"))
            throw ParseError("split plan line " + std::to_string(line_no) + ": expected 'id<TAB>L|U'");
        const auto it = index.find(std::string(fields[0]));
        if (it == index.end())
            throw ParseError("split plan line " + std::to_string(line_no) + ": unknown id '" +
                             std::string(fields[0]) + "'");
        if (seen[it->second]++) throw ParseError("split plan lists '" + it->first + "' twice");
        (fields[1] == "L" ? plan.labeled : plan.unlabeled).push_back(it->second);
    }
    if (plan.labeled.size() + plan.unlabeled.size() != corpus.train.size())
        throw ParseError("split plan does not cover every train example");
    std::sort(plan.labeled.begin(), plan.labeled.end());
    std::sort(plan.unlabeled.begin(), plan.unlabeled.end());
    return plan;
}

}  // namespace crisis
