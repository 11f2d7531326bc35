#include "crisis/error.hpp"
#include "crisis/strategies.hpp"
#include "json_io.hpp"

#include <ostream>
#include <set>

namespace crisis {

nlohmann::json to_json_value(const StrategyConfig& c) {
    nlohmann::json j{{"strategy", std::string(to_string(c.id))},
                     {"rounds", c.rounds},
                     {"threshold", c.threshold},
                     {"mixup_alpha", c.mixup_alpha},
                     {"sharpen_temperature", c.sharpen_temperature},
                     {"aum_keep_percentile", c.aum_keep_percentile},
                     {"uncertainty_samples", c.uncertainty_samples},
                     {"low_weight", c.low_weight},
                     {"accept_fraction", c.accept_fraction},
                     {"guess_augmentations", c.guess_augmentations},
                     {"augment_drop", c.augment_drop}};
    j["verify_threshold"] = c.verify_threshold ? nlohmann::json(*c.verify_threshold) : nlohmann::json(nullptr);
    return j;
}

StrategyConfig strategy_config_from_json_value(const nlohmann::json& j) {
    static const std::set<std::string> known{"strategy",       "rounds",        "threshold",
                                             "mixup_alpha",    "sharpen_temperature", "aum_keep_percentile",
                                             "uncertainty_samples", "low_weight", "accept_fraction",
                                             "guess_augmentations", "augment_drop", "verify_threshold"};
    if (!j.is_object()) throw ConfigError("strategy config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError("unknown strategy config key '" + key + "'");
    StrategyConfig c;
    try {
        if (j.contains("strategy")) {
            const auto name = j.at("strategy").get<std::string>();
            const auto id = parse_strategy(name);
            if (!id) throw ConfigError("unknown strategy '" + name + "'");
            c.id = *id;
        }
        auto read = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        read("rounds", c.rounds);
        read("threshold", c.threshold);
        read("mixup_alpha", c.mixup_alpha);
        read("sharpen_temperature", c.sharpen_temperature);
        read("aum_keep_percentile", c.aum_keep_percentile);
        read("uncertainty_samples", c.uncertainty_samples);
        read("low_weight", c.low_weight);
        read("accept_fraction", c.accept_fraction);
        read("guess_augmentations", c.guess_augmentations);
        read("augment_drop", c.augment_drop);
        if (j.contains("verify_threshold") && !j.at("verify_threshold").is_null())
            c.verify_threshold = j.at("verify_threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad strategy config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json_value(const RunRecord& r) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& s : r.rounds)
        rounds.push_back({{"round", s.round}, {"accepted", s.accepted}, {"rejected", s.rejected}, {"oos", s.oos}});
    return {{"label", r.label},
            {"event", r.event_name},
            {"budget", r.budget},
            {"seed", r.seed},
            {"config", to_json_value(r.strategy)},
            {"rounds", rounds},
            {"best_epoch", r.best_epoch},
            {"val", to_json_value(r.val)},
            {"test", to_json_value(r.test)},
            {"wall_seconds", r.wall_seconds},
            {"notes", r.notes}};
}

RunRecord run_record_from_json_value(const nlohmann::json& j) {
    RunRecord r;
    try {
        r.label = j.at("label").get<std::string>();
        r.event_name = j.at("event").get<std::string>();
        r.budget = j.at("budget").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.strategy = strategy_config_from_json_value(j.at("config"));
        for (const auto& s : j.at("rounds"))
            r.rounds.push_back(RoundStats{s.at("round").get<std::size_t>(), s.at("accepted").get<std::size_t>(),
                                          s.at("rejected").get<std::size_t>(), s.at("oos").get<std::size_t>()});
        r.best_epoch = j.at("best_epoch").get<std::size_t>();
        r.val = metrics_from_json_value(j.at("val"));
        r.test = metrics_from_json_value(j.at("test"));
        r.wall_seconds = j.at("wall_seconds").get<double>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad run record: ") + e.what());
    }
    return r;
}

std::string run_record_to_json(const RunRecord& record) { return to_json_value(record).dump(2); }

RunRecord run_record_from_json(const std::string& json) {
    try {
        return run_record_from_json_value(nlohmann::json::parse(json));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad run record: ") + e.what());
    }
}

void write_audit_tsv(std::ostream& out, std::span<const AuditEntry> audit) {
    out << "round\tid\tgold\tpseudo\tscore\taccepted\n";
    for (const auto& a : audit) {
        out << a.round << '\t' << a.example_id << '\t';
        if (a.gold) out << *a.gold;
        out << '\t';
        if (a.pseudo_label) out << *a.pseudo_label;
        out << '\t' << a.score << '\t' << (a.accepted ? 1 : 0) << '\n';
    }
}

}  // namespace crisis
