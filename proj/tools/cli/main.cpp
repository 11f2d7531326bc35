#include "crisis/aggregate.hpp"
#include "crisis/corpus.hpp"
#include "crisis/error.hpp"
#include "crisis/experiment.hpp"
#include "crisis/synthetic.hpp"
#include "crisis/task.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace crisis;

namespace {

struct Overrides {
    std::vector<std::uint64_t> seeds;
    std::string oracle;
    std::string endpoint;
    std::string out;
    std::size_t workers = 0;
};

void add_overrides(CLI::App& cmd, Overrides& o, bool with_workers) {
    cmd.add_option("--seeds", o.seeds, "Replace the configured seed list")->delimiter(',');
    cmd.add_option("--oracle", o.oracle, "Pseudo-label source")
        ->check(CLI::IsMember({"teacher", "remote", "simulated"}));
    cmd.add_option("--endpoint", o.endpoint, "Chat-completion URL for the remote oracle");
    cmd.add_option("--out", o.out, "Output directory");
    if (with_workers) cmd.add_option("--workers", o.workers, "Worker threads");
}

ExperimentConfig load_config(const std::string& path, const Overrides& o) {
    auto config = load_experiment_config(path);
    if (!o.seeds.empty()) config.seeds = o.seeds;
    if (!o.oracle.empty()) config.oracle.kind = *parse_oracle_kind(o.oracle);
    if (!o.endpoint.empty()) config.oracle.endpoint = o.endpoint;
    if (!o.out.empty()) config.output_dir = o.out;
    if (o.workers) config.workers = o.workers;
    config.validate();
    return config;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string plan_name(std::size_t budget, std::uint64_t seed) {
    return "k" + std::to_string(budget) + "_seed" + std::to_string(seed) + ".tsv";
}

int cmd_split(const std::string& config_path, const Overrides& o) {
    const auto config = load_config(config_path, o);
    const auto schema = config.schema();
    std::cout << "event\tbudget\tseed\tn_L\tn_U\n";
    for (const auto& source : config.events) {
        const auto corpus = load_event_source(source, schema);
        for (const auto b : config.budgets) {
            for (const auto s : config.seeds) {
                const auto plan = make_split_plan(corpus, b, s);
                std::ostringstream text;
                write_split_plan(text, corpus, plan);
                write_text(config.output_dir / "splits" / source.name / plan_name(b, s), text.str());
                std::cout << source.name << '\t' << b << '\t' << s << '\t' << plan.n_labeled() << '\t'
                          << plan.n_unlabeled() << '\n';
            }
        }
    }
    return 0;
}

int cmd_pseudo_label(const std::string& config_path, const Overrides& o) {
    const auto config = load_config(config_path, o);
    const auto schema = config.schema();
    std::optional<AnnotationCache> cache;
    if (config.oracle.kind == OracleKind::remote)
        cache.emplace(config.oracle.cache.value_or(config.output_dir / "annotation_cache.jsonl"));
    std::cout << "event\tbudget\tseed\toracle\tlabeled\toos\taccuracy\n";
    for (const auto& source : config.events) {
        const auto corpus = load_event_source(source, schema);
        for (const auto b : config.budgets) {
            for (const auto s : config.seeds) {
                const auto task = build_task(corpus, make_split_plan(corpus, b, s), config.featurizer);
                const auto labels =
                    oracle_labels(config.oracle, task, schema, config, s, cache ? &*cache : nullptr);
                std::ostringstream text;
                text << "id\tlabel\tconfidence\tsource\tgold\n";
                std::size_t oos = 0;
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    const auto& p = labels[i];
                    oos += p.is_oos();
                    text << p.example_id << '\t' << (p.label ? schema.name(*p.label) : "") << '\t' << p.confidence
                         << '\t' << to_string(p.source) << '\t'
                         << (task.unlabeled[i].gold ? schema.name(*task.unlabeled[i].gold) : "") << '\n';
                }
                write_text(config.output_dir / "pseudo_labels" / source.name / plan_name(b, s), text.str());
                std::cout << source.name << '\t' << b << '\t' << s << '\t' << to_string(config.oracle.kind) << '\t'
                          << labels.size() - oos << '\t' << oos << '\t'
                          << fmt3(pseudo_label_accuracy(task.unlabeled, labels)) << '\n';
            }
        }
    }
    return 0;
}

void write_aggregate(const fs::path& dir, const std::vector<RunRecord>& records) {
    const auto table = aggregate(records);
    const auto text = render_table(table);
    write_text(dir / "aggregate.txt", text);
    write_text(dir / "aggregate.json", aggregate_to_json(table));
    std::cout << text;
}

int cmd_run(const std::string& config_path, const Overrides& o, bool quiet) {
    const auto config = load_config(config_path, o);
    const auto result = run_experiment(config, [&](const RunOutcome& r) {
        if (quiet) return;
        if (r.record)
            std::cerr << (r.resumed ? "[resumed] " : "[done] ") << r.key.id() << "  F1 "
                      << fmt3(r.record->test.macro_f1) << "  ECE " << fmt3(r.record->test.ece) << '\n';
        else
            std::cerr << "[failed] " << r.key.id() << ": " << r.error << '\n';
    });
    const auto records = result.records();
    if (!records.empty()) write_aggregate(config.output_dir, records);
    const auto failed = result.failures();
    std::cerr << result.runs.size() << " runs, " << failed << " failed\n";
    return failed == 0 ? 0 : 1;
}

int cmd_aggregate(const std::string& dir) {
    const auto records = load_run_records(dir);
    if (records.empty()) throw Error("no finished runs under " + dir);
    write_aggregate(dir, records);
    return 0;
}

int cmd_export(const std::string& dir, const std::string& ablation, std::size_t ablation_budget) {
    const auto records = load_run_records(dir);
    if (records.empty()) throw Error("no finished runs under " + dir);
    for (const auto& grid : export_event_grid(records)) {
        const auto path = fs::path(dir) / ("event_grid_k" + std::to_string(grid.budget) + ".csv");
        write_text(path, grid.to_csv());
        std::cout << path.string() << '\n';
    }
    if (!ablation.empty()) {
        const auto comma = ablation.find(',');
        if (comma == std::string::npos) throw ConfigError("--ablation expects A,B");
        const auto a = ablation.substr(0, comma), b = ablation.substr(comma + 1);
        const auto rows = ablation_rows(records, a, b, ablation_budget);
        if (rows.empty()) throw Error("no events with both " + a + " and " + b + " at budget " +
                                      std::to_string(ablation_budget));
        const auto path = fs::path(dir) / ("ablation_" + a + "_vs_" + b + "_k" + std::to_string(ablation_budget) + ".csv");
        write_text(path, ablation_csv(rows, a, b));
        std::cout << path.string() << '\n';
    }
    return 0;
}

int cmd_synth(const std::string& out, const std::string& event, std::uint64_t seed) {
    const auto schema = humaid_schema();
    const auto corpus = make_synthetic_corpus(event, schema, flood_like_config(seed));
    const fs::path dir(out);
    fs::create_directories(dir);
    write_examples(dir / (event + "_train.tsv"), corpus.train, schema);
    write_examples(dir / (event + "_val.tsv"), corpus.val, schema);
    write_examples(dir / (event + "_test.tsv"), corpus.test, schema);
    std::cout << "wrote " << corpus.train.size() << '/' << corpus.val.size() << '/' << corpus.test.size()
              << " examples to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised crisis tweet classification experiments"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides split_o, label_o, run_o;
    bool quiet = false;

    auto* split = app.add_subcommand("split", "Write labeled/unlabeled split plans for every event, budget and seed");
    split->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(*split, split_o, false);

    auto* label = app.add_subcommand("pseudo-label", "Pseudo-label the unlabeled pool of every split");
    label->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(*label, label_o, false);

    auto* run = app.add_subcommand("run", "Execute the experiment grid");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(*run, run_o, true);
    run->add_flag("--quiet", quiet, "No per-run progress");

    std::string runs_dir;
    auto* agg = app.add_subcommand("aggregate", "Tabulate finished runs (mean +/- std per strategy and budget)");
    agg->add_option("--out", runs_dir, "Experiment output directory")->required()->check(CLI::ExistingDirectory);

    std::string ablation;
    std::size_t ablation_budget = 5;
    auto* exp = app.add_subcommand("export", "Per-event Macro-F1 grids as CSV");
    exp->add_option("--out", runs_dir, "Experiment output directory")->required()->check(CLI::ExistingDirectory);
    exp->add_option("--ablation", ablation, "Also write a per-event A,B comparison with deltas");
    exp->add_option("--budget", ablation_budget, "Budget for --ablation");

    std::string synth_out = "data";
    std::string synth_event = "synthetic_flood";
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a flood-like synthetic event as TSV");
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--event", synth_event, "Event name");
    synth->add_option("--seed", synth_seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*split) return cmd_split(config_path, split_o);
        if (*label) return cmd_pseudo_label(config_path, label_o);
        if (*run) return cmd_run(config_path, run_o, quiet);
        if (*agg) return cmd_aggregate(runs_dir);
        if (*exp) return cmd_export(runs_dir, ablation, ablation_budget);
        if (*synth) return cmd_synth(synth_out, synth_event, synth_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
