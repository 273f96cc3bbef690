#include "gwlab/guesser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gwlab {

namespace {
constexpr const char* kAnswerWords[] = {"yes", "no", "na"};
}

BeliefState BeliefState::uniform(std::size_t n) {
    BeliefState b;
    b.p.assign(n, 1.0 / static_cast<double>(n));
    return b;
}

GuesserModel init_guesser(const GuesserConfig& cfg, const Vocabulary& vocab,
                          std::uint64_t seed) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw InvalidSpec("init_guesser: alpha must be in [0,1]");
    GuesserModel model;
    model.cfg = cfg;
    model.cfg.enc.vocab = vocab.size();
    model.vocab = vocab;
    add_encoder_params(model.params, model.cfg.enc);
    const std::size_t d = cfg.enc.hidden;
    model.params.add("guesser.ans_embed", 3, cfg.answer_embed);
    if (cfg.answer_embed != d) model.params.add("guesser.ans_proj", cfg.answer_embed, d);
    if (cfg.head_hidden > 0) {
        model.params.add("guesser.head_w1", d, cfg.head_hidden);
        model.params.add("guesser.head_b1", 1, cfg.head_hidden);
        model.params.add("guesser.head_w2", cfg.head_hidden, 1);
        model.params.add("guesser.head_b2", 1, 1);
    } else {
        model.params.add("guesser.head_w", d, 1);
        model.params.add("guesser.head_b", 1, 1);
    }
    Rng rng(seed);
    model.params.init_uniform(rng, 0.08);
    return model;
}

Tensor2 fuse_objects(const EncoderOutput& enc) {
    Tensor2 fused(enc.h_obj.rows, enc.h_obj.cols);
    for (std::size_t i = 0; i < fused.rows; ++i) {
        auto src = enc.h_obj.row(i);
        auto dst = fused.row(i);
        for (std::size_t j = 0; j < fused.cols; ++j) dst[j] = src[j] * enc.h_cls[j];
    }
    return fused;
}

namespace {

void validate_belief(const Vec& p) {
    double sum = 0.0;
    for (double x : p) {
        if (x < 0.0 || !std::isfinite(x)) throw InvalidBelief("belief entries must be >= 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvalidBelief("belief must sum to 1, got " + std::to_string(sum));
}

/// Answer embedding projected to d, or empty when the variant skips it.
Vec answer_vector(const GuesserModel& model, AnswerClass answer) {
    if (model.cfg.variant != GuesserVariant::PostFusion || model.cfg.answer_blind)
        return {};
    const Tensor2& table = model.params.at("guesser.ans_embed");
    Vec a = table.row_vec(static_cast<std::size_t>(answer));
    if (model.cfg.answer_embed != model.cfg.enc.hidden)
        a = vecmat(a, model.params.at("guesser.ans_proj"));
    return a;
}

Vec head_logits(const GuesserModel& model, const Tensor2& v, Tensor2* hidden_out) {
    const std::size_t n = v.rows;
    Vec logits(n, 0.0);
    if (model.cfg.head_hidden > 0) {
        const Tensor2& w1 = model.params.at("guesser.head_w1");
        const Tensor2& w2 = model.params.at("guesser.head_w2");
        auto b1 = model.params.at("guesser.head_b1").row(0);
        const double b2 = model.params.at("guesser.head_b2").at(0, 0);
        Tensor2 hidden(n, model.cfg.head_hidden);
        for (std::size_t i = 0; i < n; ++i) {
            Vec pre = vecmat(v.row_vec(i), w1);
            axpy(pre, b1, 1.0);
            Vec h = vec_tanh(pre);
            logits[i] = b2;
            for (std::size_t j = 0; j < h.size(); ++j) logits[i] += h[j] * w2.at(j, 0);
            std::copy(h.begin(), h.end(),
                      hidden.data.begin() + static_cast<std::ptrdiff_t>(i * hidden.cols));
        }
        if (hidden_out) *hidden_out = std::move(hidden);
    } else {
        const Tensor2& w = model.params.at("guesser.head_w");
        const double b = model.params.at("guesser.head_b").at(0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = v.row(i);
            double x = b;
            for (std::size_t j = 0; j < row.size(); ++j) x += row[j] * w.at(j, 0);
            logits[i] = x;
        }
    }
    return logits;
}

}  // namespace

BeliefState belief_update(const Tensor2& fused, const BeliefState& belief,
                          AnswerClass answer, const GuesserModel& model,
                          GuesserTurnCache* cache) {
    if (fused.rows != belief.p.size())
        throw InvalidShape("belief_update: fused rows != belief size");
    validate_belief(belief.p);

    const std::size_t n = fused.rows;
    const std::size_t d = fused.cols;

    Tensor2 f_prime(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = fused.row(i);
        auto dst = f_prime.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] * belief.p[i];
    }

    Vec a = answer_vector(model, answer);
    Tensor2 v = f_prime;
    if (!a.empty())
        for (std::size_t i = 0; i < n; ++i) axpy(v.row(i), a, 1.0);

    Tensor2 hidden;
    Vec logits = head_logits(model, v, &hidden);
    Vec p_soft = softmax(logits);

    BeliefState out;
    out.turn_index = belief.turn_index + 1;
    out.p.resize(n);
    const double alpha = model.cfg.alpha;
    for (std::size_t i = 0; i < n; ++i)
        out.p[i] = alpha * p_soft[i] + (1.0 - alpha) * belief.p[i];

    if (cache) {
        cache->fused = fused;
        cache->p_in = belief.p;
        cache->f_prime = std::move(f_prime);
        cache->v = std::move(v);
        cache->hidden = std::move(hidden);
        cache->logits = std::move(logits);
        cache->p_soft = std::move(p_soft);
        cache->p_out = out.p;
        cache->answer = answer;
        cache->answer_used = !a.empty();
    }
    return out;
}

BeliefState guesser_turn(const GuesserModel& model, const std::string& question,
                         const ObjectFeatureSet& feats, const BeliefState& belief,
                         AnswerClass answer, GuesserTurnCache* cache) {
    QuestionTokens toks;
    if (model.cfg.variant == GuesserVariant::PreConcatenation && !model.cfg.answer_blind) {
        toks = to_question_tokens(question, model.vocab, model.cfg.max_question_len - 1);
        toks.ids.push_back(
            model.vocab.id(kAnswerWords[static_cast<std::size_t>(answer)]));
    } else {
        toks = to_question_tokens(question, model.vocab, model.cfg.max_question_len);
    }
    if (toks.truncated)
        std::fprintf(stderr, "[guesser] warning: question truncated to %zu tokens\n",
                     toks.ids.size());

    EncoderOutput out = encode(toks, feats, model.params, model.cfg.enc,
                               EncodeMode::Guesser, -1, cache ? &cache->enc : nullptr);
    Tensor2 fused = fuse_objects(out);
    BeliefState next = belief_update(fused, belief, answer, model, cache);
    if (cache) cache->out = std::move(out);
    return next;
}

int guess(const BeliefState& belief) {
    validate_belief(belief.p);
    std::size_t best = 0;
    for (std::size_t i = 1; i < belief.p.size(); ++i)
        if (belief.p[i] > belief.p[best]) best = i;
    return static_cast<int>(best);
}

DialogResult run_dialog(const GuesserModel& model, const GameRecord& game,
                        const ObjectFeatureSet& feats) {
    if (game.turns.empty()) throw InvalidData("run_dialog: game has no turns");
    BeliefState belief = BeliefState::uniform(feats.rows.rows);
    DialogResult result;
    for (const auto& [question, answer] : game.turns) {
        belief = guesser_turn(model, question, feats, belief, answer);
        result.trajectory.push_back(belief.p);
    }
    result.guess = guess(belief);
    result.success = result.guess == game.target_id;
    return result;
}

Vec guesser_turn_backward(const GuesserModel& model, const GuesserTurnCache& cache,
                          const Vec& g_p_out, GradSet& grads) {
    const std::size_t n = cache.fused.rows;
    const std::size_t d = cache.fused.cols;
    const double alpha = model.cfg.alpha;

    Vec g_p_in(n, 0.0);
    Vec g_p_soft(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g_p_soft[i] = alpha * g_p_out[i];
        g_p_in[i] = (1.0 - alpha) * g_p_out[i];
    }
    Vec g_logits = softmax_backward(cache.p_soft, g_p_soft);

    // Head backward, row by row.
    Tensor2 g_v(n, d);
    if (model.cfg.head_hidden > 0) {
        const Tensor2& w1 = model.params.at("guesser.head_w1");
        const Tensor2& w2 = model.params.at("guesser.head_w2");
        Tensor2& g_w1 = grads.at("guesser.head_w1");
        Tensor2& g_w2 = grads.at("guesser.head_w2");
        auto g_b1 = grads.at("guesser.head_b1").row(0);
        for (std::size_t i = 0; i < n; ++i) {
            const double gl = g_logits[i];
            if (gl == 0.0) continue;
            auto h = cache.hidden.row(i);
            for (std::size_t j = 0; j < h.size(); ++j) g_w2.at(j, 0) += gl * h[j];
            grads.at("guesser.head_b2").at(0, 0) += gl;
            Vec g_pre(h.size());
            for (std::size_t j = 0; j < h.size(); ++j)
                g_pre[j] = gl * w2.at(j, 0) * (1.0 - h[j] * h[j]);
            add_outer(g_w1, cache.v.row(i), g_pre);
            axpy(g_b1, g_pre, 1.0);
            Vec gv = vecmat_nt(g_pre, w1);
            std::copy(gv.begin(), gv.end(),
                      g_v.data.begin() + static_cast<std::ptrdiff_t>(i * d));
        }
    } else {
        const Tensor2& w = model.params.at("guesser.head_w");
        Tensor2& g_w = grads.at("guesser.head_w");
        for (std::size_t i = 0; i < n; ++i) {
            const double gl = g_logits[i];
            if (gl == 0.0) continue;
            auto vrow = cache.v.row(i);
            auto dst = g_v.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                g_w.at(j, 0) += gl * vrow[j];
                dst[j] = gl * w.at(j, 0);
            }
            grads.at("guesser.head_b").at(0, 0) += gl;
        }
    }

    // v_i = f'_i + a; the answer vector is shared across rows.
    if (cache.answer_used) {
        Vec g_a(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) axpy(g_a, g_v.row(i), 1.0);
        const Tensor2& table = model.params.at("guesser.ans_embed");
        const std::size_t row = static_cast<std::size_t>(cache.answer);
        if (model.cfg.answer_embed != model.cfg.enc.hidden) {
            const Tensor2& proj = model.params.at("guesser.ans_proj");
            Vec a_e = table.row_vec(row);
            add_outer(grads.at("guesser.ans_proj"), a_e, g_a);
            Vec g_ae = vecmat_nt(g_a, proj);
            axpy(grads.at("guesser.ans_embed").row(row), g_ae, 1.0);
        } else {
            axpy(grads.at("guesser.ans_embed").row(row), g_a, 1.0);
        }
    }

    // f'_i = f_i * p_in[i].
    Tensor2 g_fused(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto g_f = g_v.row(i);
        auto f = cache.fused.row(i);
        auto dst = g_fused.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] = g_f[j] * cache.p_in[i];
            g_p_in[i] += g_f[j] * f[j];
        }
    }

    // fused_i = h_obj_i .* h_cls.
    EncoderOutputGrads gout;
    gout.g_obj = Tensor2(n, d);
    gout.g_cls.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto g_f = g_fused.row(i);
        auto h_obj = cache.out.h_obj.row(i);
        auto dst = gout.g_obj.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] = g_f[j] * cache.out.h_cls[j];
            gout.g_cls[j] += g_f[j] * h_obj[j];
        }
    }
    encode_backward(cache.enc, gout, model.params, model.cfg.enc, grads);
    return g_p_in;
}

double guesser_loss_grad(const GuesserModel& model, const GameRecord& game,
                         const ObjectFeatureSet& feats, GradSet& grads) {
    if (game.turns.empty()) throw InvalidData("guesser_loss_grad: game has no turns");
    const std::size_t n = feats.rows.rows;
    BeliefState belief = BeliefState::uniform(n);
    std::vector<GuesserTurnCache> caches(game.turns.size());
    for (std::size_t t = 0; t < game.turns.size(); ++t)
        belief = guesser_turn(model, game.turns[t].first, feats, belief,
                              game.turns[t].second, &caches[t]);

    const std::size_t label = static_cast<std::size_t>(game.target_id);
    const double loss = cross_entropy(belief.p, label);
    Vec g_p = cross_entropy_grad(belief.p, label);
    for (std::size_t t = game.turns.size(); t-- > 0;)
        g_p = guesser_turn_backward(model, caches[t], g_p, grads);
    return loss;
}

TrainReport train_guesser(GuesserModel& model, const std::vector<GameRecord>& train_games,
                          const std::vector<GameRecord>& valid_games,
                          const SceneIndex& scenes, const TrainConfig& cfg) {
    std::vector<const GameRecord*> train;
    for (const auto& g : train_games)
        if (!g.turns.empty()) train.push_back(&g);
    if (train.empty()) throw InvalidData("train_guesser: no usable games");

    OptimizerState opt;
    opt.kind = cfg.optimizer;
    opt.learning_rate = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;

    TrainReport report;
    ParamSet best = model.params;
    int since_best = 0;
    Rng shuffle_rng(Rng::derive(cfg.seed, 0x90e55e7));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train.size(); i > 1; --i)
            std::swap(train[i - 1], train[shuffle_rng.index(i)]);

        double loss_sum = 0.0;
        GradSet grads = ParamSet::zeros_like(model.params);
        for (const GameRecord* g : train) {
            grads.fill_zero();
            loss_sum += guesser_loss_grad(model, *g, scenes.features(g->scene_id), grads);
            optimizer_step(model.params, grads, opt);
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_sum / static_cast<double>(train.size());
        em.train_accuracy = eval_guesser(model, train_games, scenes);
        em.valid_accuracy =
            valid_games.empty() ? em.train_accuracy : eval_guesser(model, valid_games, scenes);
        report.epochs.push_back(em);
        if (cfg.verbose)
            std::fprintf(stderr, "[guesser] epoch %d loss %.4f train %.3f valid %.3f\n",
                         epoch, em.train_loss, em.train_accuracy, em.valid_accuracy);

        if (em.valid_accuracy > report.best_valid_accuracy) {
            report.best_valid_accuracy = em.valid_accuracy;
            report.best_epoch = epoch;
            best = model.params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    model.params = best;
    return report;
}

double eval_guesser(const GuesserModel& model, const std::vector<GameRecord>& games,
                    const SceneIndex& scenes) {
    if (games.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& g : games) {
        DialogResult r = run_dialog(model, g, scenes.features(g.scene_id));
        if (r.guess == g.target_id) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(games.size());
}

}  // namespace gwlab
