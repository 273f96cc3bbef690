#pragma once

#include <string>
#include <vector>

#include "gwlab/training.hpp"

namespace gwlab {

/// Probability vector over a scene's candidate objects.
struct BeliefState {
    Vec p;
    int turn_index = 0;

    static BeliefState uniform(std::size_t n);
};

enum class GuesserVariant { PostFusion, PreConcatenation };

struct GuesserConfig {
    EncoderDims enc;
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;
    std::size_t answer_embed = 16;   // e; projected to d when e != d
    std::size_t head_hidden = 64;    // 0 selects a single linear layer
    double alpha = 0.9;              // state accumulation coefficient
    GuesserVariant variant = GuesserVariant::PostFusion;
    /// Ignore answers entirely: no answer embedding (PostFusion) and no
    /// appended answer token (PreConcatenation). Used as the corruption-robust
    /// reference model in the analysis experiments.
    bool answer_blind = false;
    std::size_t max_question_len = 12;
};

struct GuesserModel {
    GuesserConfig cfg;
    Vocabulary vocab;
    ParamSet params;
};

GuesserModel init_guesser(const GuesserConfig& cfg, const Vocabulary& vocab,
                          std::uint64_t seed);

/// Row i = h_obj[i] .* h_cls.
Tensor2 fuse_objects(const EncoderOutput& enc);

struct GuesserTurnCache {
    EncoderCache enc;
    EncoderOutput out;
    Tensor2 fused;
    Vec p_in;
    Tensor2 f_prime;
    Tensor2 v;
    Tensor2 hidden;
    Vec logits;
    Vec p_soft;
    Vec p_out;
    AnswerClass answer = AnswerClass::NA;
    bool answer_used = false;
};

/// One turn of the state estimator:
///   f'_i = f_i * p_t[i];  v_i = f'_i + proj(a);  p' = softmax(head(v));
///   p_{t+1} = alpha * p' + (1 - alpha) * p_t.
/// Throws InvalidBelief when the input is not a distribution.
BeliefState belief_update(const Tensor2& fused, const BeliefState& belief,
                          AnswerClass answer, const GuesserModel& model,
                          GuesserTurnCache* cache = nullptr);

/// Encode + fuse + belief_update for one (question, answer) pair.
BeliefState guesser_turn(const GuesserModel& model, const std::string& question,
                         const ObjectFeatureSet& feats, const BeliefState& belief,
                         AnswerClass answer, GuesserTurnCache* cache = nullptr);

/// Argmax with ties broken by lowest index.
int guess(const BeliefState& belief);

struct DialogResult {
    std::vector<Vec> trajectory;  // belief after each turn
    int guess = -1;
    bool success = false;
};

DialogResult run_dialog(const GuesserModel& model, const GameRecord& game,
                        const ObjectFeatureSet& feats);

/// Backward through one cached turn. `g_p_out` is dL/dp_{t+1}; returns
/// dL/dp_t and accumulates parameter gradients (encoder included).
Vec guesser_turn_backward(const GuesserModel& model, const GuesserTurnCache& cache,
                          const Vec& g_p_out, GradSet& grads);

/// Final-turn cross-entropy against the target, gradient unrolled through the
/// whole turn chain. Returns the loss.
double guesser_loss_grad(const GuesserModel& model, const GameRecord& game,
                         const ObjectFeatureSet& feats, GradSet& grads);

TrainReport train_guesser(GuesserModel& model, const std::vector<GameRecord>& train_games,
                          const std::vector<GameRecord>& valid_games,
                          const SceneIndex& scenes, const TrainConfig& cfg);

double eval_guesser(const GuesserModel& model, const std::vector<GameRecord>& games,
                    const SceneIndex& scenes);

}  // namespace gwlab
