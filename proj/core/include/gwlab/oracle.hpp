#pragma once

#include <map>
#include <string>

#include "gwlab/training.hpp"

namespace gwlab {

struct OracleConfig {
    EncoderDims enc;
    std::size_t category_embed = 16;
    std::size_t mlp_hidden = 64;
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;
    std::size_t max_question_len = 12;
    /// Weak variant: visual fusion entries zeroed, leaving the category
    /// embedding as the only evidence.
    bool weak = false;
};

/// Three-class answering agent over two-way background/target fusion.
struct OracleModel {
    OracleConfig cfg;
    Vocabulary vocab;
    ParamSet params;
};

OracleModel init_oracle(const OracleConfig& cfg, const Vocabulary& vocab,
                        std::uint64_t seed);

/// x = (h_img .* h_cls) ++ (h_tgt .* h_cls) ++ c_cat, length 2d + c.
/// In the weak variant the first 2d entries are zeroed.
Vec oracle_fusion(const EncoderOutput& enc, int target_category, const OracleModel& model);

/// Softmax over the 3 answer classes from the fusion vector.
Vec oracle_predict(const Vec& fusion, const OracleModel& model);

/// Full forward for one (question, target) pair.
Vec oracle_forward(const OracleModel& model, const QuestionTokens& tokens,
                   const ObjectFeatureSet& feats, int target_id, int target_category);

/// Forward + hand-written backward; accumulates into `grads`, returns the loss.
double oracle_loss_grad(const OracleModel& model, const QuestionTokens& tokens,
                        const ObjectFeatureSet& feats, int target_id,
                        int target_category, AnswerClass label, GradSet& grads);

/// Mean cross-entropy over all (question, target, answer) triples; per-epoch
/// train/valid accuracy with early stopping on validation accuracy.
TrainReport train_oracle(OracleModel& model, const std::vector<GameRecord>& train_games,
                         const std::vector<GameRecord>& valid_games,
                         const SceneIndex& scenes, const TrainConfig& cfg);

struct OracleEvalReport {
    double overall = 0.0;
    /// Keys: object, color, size, location, other.
    std::map<std::string, std::pair<double, std::size_t>> by_type;
    std::size_t total = 0;
};

OracleEvalReport eval_oracle(const OracleModel& model, const std::vector<GameRecord>& games,
                             const SceneIndex& scenes);

/// Answer for one question during play.
AnswerClass oracle_answer(const OracleModel& model, const Scene& scene,
                          const ObjectFeatureSet& feats, int target_id,
                          const std::string& question);

}  // namespace gwlab
