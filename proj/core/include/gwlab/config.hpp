#pragma once

#include <cstdint>
#include <string>

#include "gwlab/guesser.hpp"
#include "gwlab/numkernel.hpp"

namespace gwlab {

/// Experiment knobs readable from a "key = value" file ('#' comments).
/// Unknown keys and duplicate keys are rejected; values are range-checked.
struct RunConfig {
    std::size_t hidden_size = 32;
    int layer_count = 1;
    double alpha = 0.9;
    std::size_t answer_embed_size = 16;
    std::size_t category_embed_size = 16;
    std::size_t oracle_hidden = 64;
    std::size_t head_hidden = 64;
    std::size_t word_embed_size = 64;
    std::size_t max_question_len = 12;
    int max_turns = 5;
    std::uint64_t seed = 0;
    double learning_rate = 1e-2;
    int epochs = 10;
    double weight_decay = 0.0;
    OptimKind optimizer = OptimKind::AdamW;
    int patience = 3;
    bool freeze_estimator = true;
    GuesserVariant guesser_variant = GuesserVariant::PostFusion;
    bool answer_blind = false;
    std::size_t min_freq = 1;
    bool use_failed_games = false;
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Applies one "key=value" assignment (shared by file parsing and CLI
/// overrides). Throws ConfigError naming the key on any problem.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace gwlab
