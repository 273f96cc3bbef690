#include "gwlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gwlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': bad boolean '" + value + "'");
}

std::size_t parse_count(const std::string& key, const std::string& value, long long lo,
                        long long hi = 1 << 20) {
    const long long x = parse_int(key, value);
    if (x < lo || x > hi)
        throw ConfigError("config key '" + key + "': value " + value + " out of range");
    return static_cast<std::size_t>(x);
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "hidden_size") {
        cfg.hidden_size = parse_count(key, value, 2);
    } else if (key == "layer_count") {
        const long long x = parse_int(key, value);
        if (x != 0 && x != 1) throw ConfigError("config key 'layer_count': must be 0 or 1");
        cfg.layer_count = static_cast<int>(x);
    } else if (key == "alpha") {
        cfg.alpha = parse_real(key, value);
        if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
            throw ConfigError("config key 'alpha': must be in [0,1]");
    } else if (key == "answer_embed_size") {
        cfg.answer_embed_size = parse_count(key, value, 1);
    } else if (key == "category_embed_size") {
        cfg.category_embed_size = parse_count(key, value, 1);
    } else if (key == "oracle_hidden") {
        cfg.oracle_hidden = parse_count(key, value, 1);
    } else if (key == "head_hidden") {
        cfg.head_hidden = parse_count(key, value, 0);
    } else if (key == "word_embed_size") {
        cfg.word_embed_size = parse_count(key, value, 1);
    } else if (key == "max_question_len") {
        cfg.max_question_len = parse_count(key, value, 2);
    } else if (key == "max_turns") {
        cfg.max_turns = static_cast<int>(parse_count(key, value, 1));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "learning_rate") {
        cfg.learning_rate = parse_real(key, value);
        if (cfg.learning_rate <= 0.0)
            throw ConfigError("config key 'learning_rate': must be positive");
    } else if (key == "epochs") {
        cfg.epochs = static_cast<int>(parse_count(key, value, 1));
    } else if (key == "weight_decay") {
        cfg.weight_decay = parse_real(key, value);
        if (cfg.weight_decay < 0.0)
            throw ConfigError("config key 'weight_decay': must be >= 0");
    } else if (key == "optimizer") {
        if (value == "sgd") cfg.optimizer = OptimKind::SGD;
        else if (value == "adamw") cfg.optimizer = OptimKind::AdamW;
        else throw ConfigError("config key 'optimizer': expected sgd or adamw");
    } else if (key == "patience") {
        cfg.patience = static_cast<int>(parse_count(key, value, 1));
    } else if (key == "freeze_estimator") {
        cfg.freeze_estimator = parse_bool(key, value);
    } else if (key == "guesser_variant") {
        if (value == "post_fusion") cfg.guesser_variant = GuesserVariant::PostFusion;
        else if (value == "pre_concatenation")
            cfg.guesser_variant = GuesserVariant::PreConcatenation;
        else
            throw ConfigError(
                "config key 'guesser_variant': expected post_fusion or pre_concatenation");
    } else if (key == "answer_blind") {
        cfg.answer_blind = parse_bool(key, value);
    } else if (key == "min_freq") {
        cfg.min_freq = parse_count(key, value, 1);
    } else if (key == "use_failed_games") {
        cfg.use_failed_games = parse_bool(key, value);
    } else if (key == "n_categories") {
        cfg.n_categories = static_cast<int>(parse_count(key, value, 1, kMaxCategories));
    } else if (key == "n_colors") {
        cfg.n_colors = static_cast<int>(parse_count(key, value, 1, kMaxColors));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        if (!seen.insert(key).second)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace gwlab
