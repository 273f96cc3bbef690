#pragma once

#include <string>
#include <vector>

#include "gwlab/guesser.hpp"

namespace gwlab {

struct QuestionerConfig {
    std::size_t word_embed = 64;
    std::size_t max_question_len = 12;
    int max_turns = 5;
    bool freeze_estimator = true;
};

/// Question generator: belief-reweighted object features feed a vis-diff
/// context vector that initializes a gated recurrent decoder. The state
/// estimator is a loaded guesser, frozen by default.
struct QuestionerModel {
    QuestionerConfig cfg;
    GuesserModel estimator;
    ParamSet dec;  // "dec." parameters

    const Vocabulary& vocab() const { return estimator.vocab; }
};

QuestionerModel init_questioner(const QuestionerConfig& cfg, GuesserModel estimator,
                                std::uint64_t seed);

/// Row i scaled by belief[i].
Tensor2 reweight_objects(const Tensor2& projected, const Vec& belief);

struct VisDiffCache {
    Tensor2 weighted;
    Tensor2 diffs;  // d_i rows
    Vec merged;     // mean over i of (w_i ++ |d_i|)
};

/// d_i = w_i - mean_{j != i} w_j; v_t = proj(mean_i(w_i ++ |d_i|)). Signed
/// diffs sum to zero over i, so the merge uses their smooth absolute value.
Vec vis_diff(const Tensor2& weighted, const ParamSet& dec, VisDiffCache* cache = nullptr);

/// Greedy decode from [SOS]; stops at [EOS] or max_len emitted tokens.
/// [PAD] and [CLS] are masked out. Pass an Rng to sample instead of argmax.
std::vector<std::size_t> decode_question_ids(const Vec& v_t, const ParamSet& dec,
                                             const Vocabulary& vocab, std::size_t max_len,
                                             Rng* sampler = nullptr,
                                             double temperature = 1.0);

/// Ids joined into surface text with a terminal '?'.
std::string decode_question(const Vec& v_t, const ParamSet& dec, const Vocabulary& vocab,
                            std::size_t max_len, Rng* sampler = nullptr,
                            double temperature = 1.0);

/// Context vector for the current belief over a scene's objects.
Vec questioner_context(const QuestionerModel& model, const ObjectFeatureSet& feats,
                       const Vec& belief, VisDiffCache* cache = nullptr);

/// Teacher-forced loss and gradients for one gold game. Gradients for the
/// estimator are produced only when freeze_estimator is off. Returns summed
/// token cross-entropy; token_count reports the number of predictions.
double questioner_loss_grad(const QuestionerModel& model, const GameRecord& game,
                            const ObjectFeatureSet& feats, GradSet& dec_grads,
                            GradSet* est_grads, std::size_t& token_count);

/// Mean per-token cross-entropy of gold questions under the decoder.
double questioner_token_ce(const QuestionerModel& model,
                           const std::vector<GameRecord>& games, const SceneIndex& scenes);

/// Trains the decoder (and the estimator too when fine-tuning is enabled).
/// EpochMetrics.valid_accuracy carries -(valid per-token CE) so that the
/// shared "higher is better" early stopping applies.
TrainReport train_questioner(QuestionerModel& model,
                             const std::vector<GameRecord>& train_games,
                             const std::vector<GameRecord>& valid_games,
                             const SceneIndex& scenes, const TrainConfig& cfg);

}  // namespace gwlab
