#include "crisis/experiment.hpp"

#include "crisis/annotation_cache.hpp"
#include "crisis/error.hpp"
#include "crisis/remote_annotator.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace crisis {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string path_component(std::string_view s) {
    std::string out;
    for (const char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "_" : out;
}

template <class T>
void read_opt(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

SyntheticConfig synthetic_from_json(const json& j) {
    reject_unknown(j,
                   {"preset", "train_counts", "val_counts", "test_counts", "class_vocab", "background_vocab",
                    "zipf_exponent", "signal_rate", "cross_signal_rate", "min_tokens", "max_tokens", "seed"},
                   "synthetic");
    SyntheticConfig c;
    const std::string preset = j.value("preset", std::string("flood"));
    if (preset == "flood") {
        c = flood_like_config();
    } else if (preset != "custom") {
        throw ConfigError("unknown synthetic preset '" + preset + "'");
    }
    read_opt(j, "train_counts", c.train_counts);
    read_opt(j, "val_counts", c.val_counts);
    read_opt(j, "test_counts", c.test_counts);
    read_opt(j, "class_vocab", c.class_vocab);
    read_opt(j, "background_vocab", c.background_vocab);
    read_opt(j, "zipf_exponent", c.zipf_exponent);
    read_opt(j, "signal_rate", c.signal_rate);
    read_opt(j, "cross_signal_rate", c.cross_signal_rate);
    read_opt(j, "min_tokens", c.min_tokens);
    read_opt(j, "max_tokens", c.max_tokens);
    read_opt(j, "seed", c.seed);
    return c;
}

json synthetic_to_json(const SyntheticConfig& c) {
    return {{"preset", "custom"},
            {"train_counts", c.train_counts},
            {"val_counts", c.val_counts},
            {"test_counts", c.test_counts},
            {"class_vocab", c.class_vocab},
            {"background_vocab", c.background_vocab},
            {"zipf_exponent", c.zipf_exponent},
            {"signal_rate", c.signal_rate},
            {"cross_signal_rate", c.cross_signal_rate},
            {"min_tokens", c.min_tokens},
            {"max_tokens", c.max_tokens},
            {"seed", c.seed}};
}

}  // namespace

std::string_view to_string(OracleKind kind) {
    switch (kind) {
        case OracleKind::teacher: return "teacher";
        case OracleKind::remote: return "remote";
        case OracleKind::simulated: return "simulated";
    }
    return "unknown";
}

std::optional<OracleKind> parse_oracle_kind(std::string_view name) {
    if (name == "teacher") return OracleKind::teacher;
    if (name == "remote") return OracleKind::remote;
    if (name == "simulated") return OracleKind::simulated;
    return std::nullopt;
}

LabelSchema ExperimentConfig::schema() const { return categories.empty() ? humaid_schema() : LabelSchema(categories); }

void ExperimentConfig::validate() const {
    if (events.empty()) throw ConfigError("experiment needs at least one event");
    if (budgets.empty()) throw ConfigError("experiment needs at least one budget");
    if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
    if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    const auto k = schema().size();
    std::set<std::string> names;
    for (const auto& ev : events) {
        if (ev.name.empty()) throw ConfigError("event without a name");
        if (!names.insert(ev.name).second) throw ConfigError("duplicate event '" + ev.name + "'");
        if (ev.synthetic) {
            if (ev.train) throw ConfigError("event '" + ev.name + "' sets both files and a synthetic corpus");
            ev.synthetic->validate(k);
            continue;
        }
        if (!ev.train) throw ConfigError("event '" + ev.name + "' has no train file");
        for (const auto* p : {&ev.train, &ev.val, &ev.test}) {
            if (*p && !fs::exists(**p))
                throw ConfigError("event '" + ev.name + "': file not found: " + (*p)->string());
        }
    }
    for (const auto b : budgets)
        if (b < 1) throw ConfigError("budgets must be >= 1");
    std::set<std::string> labels;
    for (const auto& s : strategies) {
        if (s.label.empty()) throw ConfigError("strategy without a label");
        if (!labels.insert(s.label).second) throw ConfigError("duplicate strategy label '" + s.label + "'");
        s.config.validate();
        if ((s.config.id == StrategyId::ust) && !(model.dropout_rate > 0.0))
            throw ConfigError("strategy '" + s.label + "' needs dropout > 0");
        if ((s.config.id == StrategyId::aum_st || s.config.id == StrategyId::aum_st_mixup) && train.epochs < 2)
            throw ConfigError("strategy '" + s.label + "' needs at least 2 epochs");
    }
    featurizer.validate();
    train.validate();
    if (!(model.dropout_rate >= 0.0 && model.dropout_rate < 1.0)) throw ConfigError("dropout must lie in [0,1)");
    if (oracle.kind == OracleKind::simulated) make_profile(oracle, k);
    if (oracle.kind == OracleKind::remote && oracle.endpoint.empty())
        throw ConfigError("remote oracle needs an endpoint");
}

ExperimentConfig experiment_config_from_json(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"categories", "events", "budgets", "strategies", "seeds", "oracle", "featurizer", "model", "train",
                    "output_dir", "workers", "audit"},
                   "experiment config");
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };

    ExperimentConfig c;
    try {
        read_opt(j, "categories", c.categories);
        for (const auto& e : j.at("events")) {
            reject_unknown(e, {"name", "train", "val", "test", "synthetic"}, "event");
            EventSource ev;
            ev.name = e.at("name").get<std::string>();
            if (e.contains("train")) ev.train = resolve(e.at("train").get<std::string>());
            if (e.contains("val")) ev.val = resolve(e.at("val").get<std::string>());
            if (e.contains("test")) ev.test = resolve(e.at("test").get<std::string>());
            if (e.contains("synthetic")) {
                const auto& syn = e.at("synthetic");
                ev.synthetic = synthetic_from_json(syn.is_string() ? json{{"preset", syn}} : syn);
            }
            c.events.push_back(std::move(ev));
        }
        read_opt(j, "budgets", c.budgets);
        read_opt(j, "seeds", c.seeds);
        if (j.contains("strategies")) {
            for (const auto& s : j.at("strategies")) {
                NamedStrategy ns;
                if (s.is_string()) {
                    ns.config = strategy_config_from_json_value(json{{"strategy", s}});
                    ns.label = s.get<std::string>();
                } else {
                    json rest = s;
                    if (rest.contains("label")) {
                        ns.label = rest.at("label").get<std::string>();
                        rest.erase("label");
                    }
                    ns.config = strategy_config_from_json_value(rest);
                    if (ns.label.empty()) ns.label = std::string(to_string(ns.config.id));
                }
                c.strategies.push_back(std::move(ns));
            }
        } else {
            for (const auto id : all_strategies()) {
                StrategyConfig sc;
                sc.id = id;
                c.strategies.push_back({std::string(to_string(id)), sc});
            }
        }
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            reject_unknown(o,
                           {"kind", "profile", "uniform_accuracy", "per_class_accuracy", "seed", "endpoint", "model",
                            "prompt_template", "token_env", "max_retries", "rate_limit", "concurrency", "cache"},
                           "oracle");
            if (o.contains("kind")) {
                const auto name = o.at("kind").get<std::string>();
                const auto kind = parse_oracle_kind(name);
                if (!kind) throw ConfigError("unknown oracle kind '" + name + "'");
                c.oracle.kind = *kind;
            }
            read_opt(o, "profile", c.oracle.profile);
            read_opt(o, "uniform_accuracy", c.oracle.uniform_accuracy);
            read_opt(o, "per_class_accuracy", c.oracle.per_class_accuracy);
            read_opt(o, "seed", c.oracle.seed);
            read_opt(o, "endpoint", c.oracle.endpoint);
            read_opt(o, "model", c.oracle.model);
            read_opt(o, "prompt_template", c.oracle.prompt_template);
            read_opt(o, "token_env", c.oracle.token_env);
            read_opt(o, "max_retries", c.oracle.max_retries);
            read_opt(o, "rate_limit", c.oracle.rate_limit);
            read_opt(o, "concurrency", c.oracle.concurrency);
            if (o.contains("cache")) c.oracle.cache = resolve(o.at("cache").get<std::string>());
        }
        if (j.contains("featurizer")) {
            const auto& f = j.at("featurizer");
            reject_unknown(f, {"dim", "ngram_orders", "lowercase", "normalize_urls_users"}, "featurizer");
            read_opt(f, "dim", c.featurizer.dim);
            read_opt(f, "ngram_orders", c.featurizer.ngram_orders);
            read_opt(f, "lowercase", c.featurizer.lowercase);
            read_opt(f, "normalize_urls_users", c.featurizer.normalize_urls_users);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            reject_unknown(m, {"hidden_dim", "dropout"}, "model");
            read_opt(m, "hidden_dim", c.model.hidden_dim);
            read_opt(m, "dropout", c.model.dropout_rate);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            reject_unknown(t, {"learning_rate", "batch_size", "epochs", "weight_decay", "optimizer"}, "train");
            read_opt(t, "learning_rate", c.train.learning_rate);
            read_opt(t, "batch_size", c.train.batch_size);
            read_opt(t, "epochs", c.train.epochs);
            read_opt(t, "weight_decay", c.train.weight_decay);
            if (t.contains("optimizer")) {
                const auto name = t.at("optimizer").get<std::string>();
                if (name == "adam") c.train.optimizer = Optimizer::adam;
                else if (name == "sgd") c.train.optimizer = Optimizer::sgd;
                else throw ConfigError("unknown optimizer '" + name + "'");
            }
        }
        if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
        read_opt(j, "workers", c.workers);
        read_opt(j, "audit", c.write_audit);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    return experiment_config_from_json(read_file(path), path.parent_path());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
    json events = json::array();
    for (const auto& ev : c.events) {
        json e{{"name", ev.name}};
        if (ev.train) e["train"] = ev.train->string();
        if (ev.val) e["val"] = ev.val->string();
        if (ev.test) e["test"] = ev.test->string();
        if (ev.synthetic) e["synthetic"] = synthetic_to_json(*ev.synthetic);
        events.push_back(std::move(e));
    }
    json strategies = json::array();
    for (const auto& s : c.strategies) {
        json sj = to_json_value(s.config);
        sj["label"] = s.label;
        strategies.push_back(std::move(sj));
    }
    json oracle{{"kind", std::string(to_string(c.oracle.kind))},
                {"profile", c.oracle.profile},
                {"uniform_accuracy", c.oracle.uniform_accuracy},
                {"per_class_accuracy", c.oracle.per_class_accuracy},
                {"seed", c.oracle.seed},
                {"endpoint", c.oracle.endpoint},
                {"model", c.oracle.model},
                {"prompt_template", c.oracle.prompt_template},
                {"token_env", c.oracle.token_env},
                {"max_retries", c.oracle.max_retries},
                {"rate_limit", c.oracle.rate_limit},
                {"concurrency", c.oracle.concurrency}};
    if (c.oracle.cache) oracle["cache"] = c.oracle.cache->string();
    json j{{"categories", c.categories},
           {"events", events},
           {"budgets", c.budgets},
           {"strategies", strategies},
           {"seeds", c.seeds},
           {"oracle", oracle},
           {"featurizer",
            {{"dim", c.featurizer.dim},
             {"ngram_orders", c.featurizer.ngram_orders},
             {"lowercase", c.featurizer.lowercase},
             {"normalize_urls_users", c.featurizer.normalize_urls_users}}},
           {"model", {{"hidden_dim", c.model.hidden_dim}, {"dropout", c.model.dropout_rate}}},
           {"train",
            {{"learning_rate", c.train.learning_rate},
             {"batch_size", c.train.batch_size},
             {"epochs", c.train.epochs},
             {"weight_decay", c.train.weight_decay},
             {"optimizer", c.train.optimizer == Optimizer::adam ? "adam" : "sgd"}}},
           {"output_dir", c.output_dir.string()},
           {"workers", c.workers},
           {"audit", c.write_audit}};
    return j.dump(2);
}

std::string RunKey::id() const {
    return path_component(event) + "/k" + std::to_string(budget) + "/" + path_component(strategy) + "/seed" +
           std::to_string(seed);
}

std::size_t ExperimentResult::failures() const {
    return static_cast<std::size_t>(
        std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return !r.record.has_value(); }));
}

std::vector<RunRecord> ExperimentResult::records() const {
    std::vector<RunRecord> out;
    for (const auto& r : runs)
        if (r.record) out.push_back(*r.record);
    return out;
}

OracleProfile make_profile(const OracleSettings& oracle, std::size_t class_count) {
    OracleProfile profile;
    if (!oracle.per_class_accuracy.empty()) {
        profile.per_class_accuracy = oracle.per_class_accuracy;
        profile.seed = oracle.seed;
    } else if (oracle.profile == "humaid") {
        profile = humaid_llm_profile(oracle.seed);
    } else if (oracle.profile == "uniform") {
        profile = uniform_profile(class_count, oracle.uniform_accuracy, oracle.seed);
    } else {
        throw ConfigError("unknown oracle profile '" + oracle.profile + "'");
    }
    profile.validate(class_count);
    return profile;
}

EventCorpus load_event_source(const EventSource& source, const LabelSchema& schema) {
    if (source.synthetic) return make_synthetic_corpus(source.name, schema, *source.synthetic);
    if (!source.train) throw ConfigError("event '" + source.name + "' has no train file");
    return load_event(source.name, schema, *source.train, source.val, source.test);
}

std::vector<PseudoLabel> oracle_labels(const OracleSettings& oracle, const TaskData& task, const LabelSchema& schema,
                                       const ExperimentConfig& config, std::uint64_t seed, AnnotationCache* cache) {
    switch (oracle.kind) {
        case OracleKind::simulated:
            return annotate_simulated(task.unlabeled, make_profile(oracle, task.class_count), task.class_count);
        case OracleKind::teacher: {
            const auto teacher = fit_model(labeled_pool(task), task, config.model, config.train, seed);
            return annotate_teacher(teacher.params, task.unlabeled);
        }
        case OracleKind::remote: {
            std::optional<AnnotationCache> own;
            if (!cache) cache = &own.emplace(oracle.cache.value_or(config.output_dir / "annotation_cache.jsonl"));
            AnnotationRequest request;
            request.endpoint = oracle.endpoint;
            request.model = oracle.model;
            request.prompt_template = oracle.prompt_template;
            request.token_env = oracle.token_env;
            request.max_retries = oracle.max_retries;
            request.rate_limit = oracle.rate_limit;
            request.concurrency = oracle.concurrency;
            for (const auto& inst : task.unlabeled) request.batch.push_back({inst.id, inst.text});
            if (request.batch.empty()) return {};
            const auto result = annotate_remote(request, schema, *cache);
            if (!result.failures.empty())
                throw Error(std::to_string(result.failures.size()) + " remote annotations failed (first: " +
                            result.failures.front().example_id + ": " + result.failures.front().error + ")");
            return align_pseudo_labels(task.unlabeled, result.labels);
        }
    }
    throw ConfigError("unknown oracle kind");
}

namespace {

std::map<std::string, fs::path> finished_runs(const fs::path& output_dir) {
    std::map<std::string, fs::path> done;
    const fs::path manifest_path = output_dir / "manifest.jsonl";
    if (!fs::exists(manifest_path)) return done;
    std::ifstream in(manifest_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto m = json::parse(line);
            const auto id = m.at("id").get<std::string>();
            if (m.at("status").get<std::string>() == "ok")
                done[id] = output_dir / m.at("record").get<std::string>();
            else
                done.erase(id);
        } catch (const json::exception&) {
            // A torn trailing line from an interrupted run; that run is simply redone.
        }
    }
    return done;
}

}  // namespace

std::vector<RunRecord> load_run_records(const fs::path& output_dir) {
    if (!fs::exists(output_dir / "manifest.jsonl"))
        throw Error("no manifest.jsonl under " + output_dir.string());
    std::vector<RunRecord> out;
    for (const auto& [id, path] : finished_runs(output_dir)) out.push_back(run_record_from_json(read_file(path)));
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    config.validate();
    const LabelSchema schema = config.schema();
    const fs::path manifest_path = config.output_dir / "manifest.jsonl";
    fs::create_directories(config.output_dir);
    write_file_atomic(config.output_dir / "experiment.json", experiment_config_to_json(config));

    // Completed runs from an earlier execution; later manifest lines win.
    const auto done = finished_runs(config.output_dir);

    struct Group {
        std::size_t event = 0;
        std::size_t budget = 0;
        std::uint64_t seed = 0;
        std::size_t first_slot = 0;
    };
    ExperimentResult result;
    std::vector<Group> groups;
    for (std::size_t e = 0; e < config.events.size(); ++e)
        for (const auto b : config.budgets)
            for (const auto s : config.seeds) {
                groups.push_back({e, b, s, result.runs.size()});
                for (const auto& st : config.strategies)
                    result.runs.push_back(RunOutcome{RunKey{config.events[e].name, b, st.label, s}, {}, {}, false});
            }

    // Resume: load finished records up front.
    std::vector<bool> pending(result.runs.size(), true);
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        auto& run = result.runs[i];
        const auto it = done.find(run.key.id());
        if (it == done.end()) continue;
        try {
            run.record = run_record_from_json(read_file(it->second));
            run.resumed = true;
            pending[i] = false;
            if (progress) progress(run);
        } catch (const Error&) {
            // Missing or unreadable record: run it again.
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& grp = groups[g];
        for (std::size_t i = 0; i < config.strategies.size(); ++i)
            if (pending[grp.first_slot + i]) {
                todo.push_back(g);
                break;
            }
    }

    // Workers execute groups and hand finished runs to this thread, which alone
    // writes the manifest.
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::size_t> finished;
    std::atomic<std::size_t> next{0};
    std::size_t active = std::min(config.workers, todo.size());
    std::mutex corpus_mutex;
    std::map<std::size_t, std::shared_ptr<const EventCorpus>> corpora;
    std::unique_ptr<AnnotationCache> cache;
    if (config.oracle.kind == OracleKind::remote && !todo.empty())
        cache = std::make_unique<AnnotationCache>(
            config.oracle.cache.value_or(config.output_dir / "annotation_cache.jsonl"));

    auto corpus_for = [&](std::size_t e) {
        std::lock_guard lock(corpus_mutex);
        auto& slot = corpora[e];
        if (!slot) slot = std::make_shared<const EventCorpus>(load_event_source(config.events[e], schema));
        return slot;
    };
    auto publish = [&](std::size_t slot) {
        {
            std::lock_guard lock(mutex);
            finished.push_back(slot);
        }
        cv.notify_one();
    };

    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= todo.size()) break;
            const auto& grp = groups[todo[t]];
            std::optional<TaskData> task;
            std::optional<std::vector<PseudoLabel>> llm;
            std::string setup_error;
            try {
                const auto corpus = corpus_for(grp.event);
                task = build_task(*corpus, make_split_plan(*corpus, grp.budget, grp.seed), config.featurizer);
            } catch (const std::exception& e) {
                setup_error = e.what();
            }
            for (std::size_t i = 0; i < config.strategies.size(); ++i) {
                const std::size_t slot = grp.first_slot + i;
                if (!pending[slot]) continue;
                auto& run = result.runs[slot];
                const auto& st = config.strategies[i];
                try {
                    if (!task) throw Error(setup_error);
                    if (uses_llm_labels(st.config.id) && !llm)
                        llm = oracle_labels(config.oracle, *task, schema, config, grp.seed, cache.get());
                    StrategyContext ctx;
                    ctx.task = &*task;
                    ctx.model = config.model;
                    ctx.train = config.train;
                    ctx.seed = grp.seed;
                    ctx.budget = grp.budget;
                    ctx.record_audit = config.write_audit;
                    if (llm) ctx.llm_labels = *llm;
                    auto out = run_strategy(st.config, ctx);
                    out.record.label = st.label;
                    const fs::path base = config.output_dir / "runs" / run.key.id();
                    write_file_atomic(base.string() + ".json", run_record_to_json(out.record));
                    if (config.write_audit) {
                        std::ostringstream audit;
                        write_audit_tsv(audit, out.audit);
                        write_file_atomic(base.string() + ".audit.tsv", audit.str());
                    }
                    run.record = std::move(out.record);
                } catch (const std::exception& e) {
                    run.error = e.what();
                }
                publish(slot);
            }
        }
        {
            std::lock_guard lock(mutex);
            --active;
        }
        cv.notify_one();
    };

    std::ofstream manifest(manifest_path, std::ios::app);
    if (!manifest) throw Error("cannot open manifest " + manifest_path.string());
    std::vector<std::jthread> pool;
    const std::size_t width = active;
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);

    std::unique_lock lock(mutex);
    for (;;) {
        cv.wait(lock, [&] { return !finished.empty() || active == 0; });
        while (!finished.empty()) {
            const std::size_t slot = finished.front();
            finished.pop_front();
            lock.unlock();
            const auto& run = result.runs[slot];
            json line{{"id", run.key.id()},
                      {"event", run.key.event},
                      {"budget", run.key.budget},
                      {"strategy", run.key.strategy},
                      {"seed", run.key.seed},
                      {"status", run.record ? "ok" : "failed"},
                      {"record", "runs/" + run.key.id() + ".json"},
                      {"error", run.error}};
            manifest << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
            manifest.flush();
            if (progress) progress(run);
            lock.lock();
        }
        if (active == 0 && finished.empty()) break;
    }
    lock.unlock();
    pool.clear();
    return result;
}

}  // namespace crisis
