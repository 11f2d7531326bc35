#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crisis {

/// Ordered set of class names. Order is fixed for the lifetime of an
/// experiment; class indices everywhere else refer to positions here.
class LabelSchema {
public:
    explicit LabelSchema(std::vector<std::string> categories);

    std::size_t size() const noexcept { return categories_.size(); }
    const std::vector<std::string>& categories() const noexcept { return categories_; }
    const std::string& name(std::size_t index) const { return categories_.at(index); }

    std::optional<std::size_t> index_of(std::string_view name) const;
    // Case-insensitive match after trimming surrounding whitespace.
    std::optional<std::size_t> match(std::string_view response) const;

    bool operator==(const LabelSchema&) const = default;

private:
    std::vector<std::string> categories_;
};

/// The ten HumAID humanitarian categories, in their canonical order.
LabelSchema humaid_schema();

struct Example {
    std::string id;
    std::string text;
    std::optional<std::size_t> gold_label;
};

struct EventCorpus {
    std::string event_name;
    LabelSchema schema;
    std::vector<Example> train;
    std::vector<Example> val;
    std::vector<Example> test;
    std::vector<std::size_t> class_counts;  // per schema class, over train

    // Classes with at least one train example, ascending.
    std::vector<std::size_t> active_classes() const;
};

// TSV with header `id<TAB>text<TAB>label`. Text may not contain tabs or
// newlines; there is no quoting. An empty label field means "unlabeled".
std::vector<Example> read_examples(std::istream& in, const LabelSchema& schema,
                                   std::string_view source_name = "<stream>");
std::vector<Example> read_examples(const std::filesystem::path& path, const LabelSchema& schema);
void write_examples(std::ostream& out, const std::vector<Example>& examples, const LabelSchema& schema);
void write_examples(const std::filesystem::path& path, const std::vector<Example>& examples,
                    const LabelSchema& schema);

// Loads a single file as the train split. Every row must carry a label.
EventCorpus load_corpus(const std::filesystem::path& path, const LabelSchema& schema);

// Assembles an event from in-memory splits. Every train example must carry a label.
EventCorpus make_event(std::string event_name, const LabelSchema& schema, std::vector<Example> train,
                       std::vector<Example> val, std::vector<Example> test);

// Loads train/val/test files for one event. Missing val/test paths are allowed
// (empty optional) and yield empty splits.
EventCorpus load_event(std::string event_name, const LabelSchema& schema,
                       const std::filesystem::path& train,
                       const std::optional<std::filesystem::path>& val,
                       const std::optional<std::filesystem::path>& test);

std::vector<std::size_t> count_classes(const std::vector<Example>& examples, std::size_t class_count);

struct SplitPlan {
    std::size_t budget_k = 0;
    std::uint64_t seed = 0;
    // Indices into EventCorpus::train, ascending.
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> unlabeled;

    std::size_t n_labeled() const noexcept { return labeled.size(); }
    std::size_t n_unlabeled() const noexcept { return unlabeled.size(); }
};

/// Per class (in class-index order), draws min(k, available) train examples
/// uniformly without replacement from one generator seeded by `seed`. The rest
/// of train is unlabeled.
SplitPlan make_split_plan(const EventCorpus& corpus, std::size_t budget_k, std::uint64_t seed);

// Split-only variant over a bare label column; used when only class
// distributions are known.
SplitPlan make_split_plan(const std::vector<std::size_t>& train_labels, std::size_t class_count,
                          std::size_t budget_k, std::uint64_t seed);

// Audit format: one `id<TAB>L|U` line per train example, in train order.
void write_split_plan(std::ostream& out, const EventCorpus& corpus, const SplitPlan& plan);
SplitPlan read_split_plan(std::istream& in, const EventCorpus& corpus);

}  // namespace crisis
