#include "gwlab/questioner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gwlab {

QuestionerModel init_questioner(const QuestionerConfig& cfg, GuesserModel estimator,
                                std::uint64_t seed) {
    if (cfg.max_turns < 1) throw InvalidSpec("init_questioner: max_turns >= 1");
    QuestionerModel model;
    model.cfg = cfg;
    model.estimator = std::move(estimator);
    const std::size_t d = model.estimator.cfg.enc.hidden;
    const std::size_t w = cfg.word_embed;
    const std::size_t v = model.estimator.vocab.size();
    ParamSet& dec = model.dec;
    dec.add("dec.word_embed", v, w);
    dec.add("dec.gru_wz", w, d);
    dec.add("dec.gru_uz", d, d);
    dec.add("dec.gru_bz", 1, d);
    dec.add("dec.gru_wr", w, d);
    dec.add("dec.gru_ur", d, d);
    dec.add("dec.gru_br", 1, d);
    dec.add("dec.gru_wc", w, d);
    dec.add("dec.gru_uc", d, d);
    dec.add("dec.gru_bc", 1, d);
    dec.add("dec.out_w", d, v);
    dec.add("dec.out_b", 1, v);
    dec.add("dec.init_w", d, d);
    dec.add("dec.init_b", 1, d);
    dec.add("dec.visdiff_w", 2 * d, d);
    Rng rng(seed);
    dec.init_uniform(rng, 0.08);
    return model;
}

Tensor2 reweight_objects(const Tensor2& projected, const Vec& belief) {
    if (projected.rows != belief.size())
        throw InvalidShape("reweight_objects: rows != belief size");
    Tensor2 out(projected.rows, projected.cols);
    for (std::size_t i = 0; i < out.rows; ++i) {
        auto src = projected.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) dst[j] = src[j] * belief[i];
    }
    return out;
}

Vec vis_diff(const Tensor2& weighted, const ParamSet& dec, VisDiffCache* cache) {
    const std::size_t n = weighted.rows;
    const std::size_t d = weighted.cols;
    if (n < 2) throw InvalidScene("vis_diff: needs at least 2 objects");

    Vec sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) axpy(sum, weighted.row(i), 1.0);

    // merged = mean_i of (w_i ++ |d_i|), d_i = w_i - (sum - w_i)/(n-1).
    // Signed diffs cancel identically in the mean, so the merge takes their
    // smooth absolute value to keep the distinctiveness signal.
    Tensor2 diffs(n, d);
    Vec merged(2 * d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_n1 = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto w = weighted.row(i);
        auto drow = diffs.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            drow[j] = w[j] - (sum[j] - w[j]) * inv_n1;
            merged[j] += w[j] * inv_n;
            merged[d + j] += std::sqrt(drow[j] * drow[j] + 1e-12) * inv_n;
        }
    }
    Vec v_t = vecmat(merged, dec.at("dec.visdiff_w"));
    if (cache) {
        cache->weighted = weighted;
        cache->diffs = std::move(diffs);
        cache->merged = std::move(merged);
    }
    return v_t;
}

namespace {

struct GruStepCache {
    std::size_t input_id = 0;
    Vec x, h_in, z, r, c, h_out;
    Vec probs;
    std::size_t target = 0;
};

Vec gru_step(const ParamSet& dec, std::size_t input_id, const Vec& h_in,
             GruStepCache* cache) {
    Vec x = dec.at("dec.word_embed").row_vec(input_id);

    Vec az = vecmat(x, dec.at("dec.gru_wz"));
    axpy(az, vecmat(h_in, dec.at("dec.gru_uz")), 1.0);
    axpy(az, dec.at("dec.gru_bz").row(0), 1.0);
    Vec z = vec_sigmoid(az);

    Vec ar = vecmat(x, dec.at("dec.gru_wr"));
    axpy(ar, vecmat(h_in, dec.at("dec.gru_ur")), 1.0);
    axpy(ar, dec.at("dec.gru_br").row(0), 1.0);
    Vec r = vec_sigmoid(ar);

    Vec rh = vec_hadamard(r, h_in);
    Vec ac = vecmat(x, dec.at("dec.gru_wc"));
    axpy(ac, vecmat(rh, dec.at("dec.gru_uc")), 1.0);
    axpy(ac, dec.at("dec.gru_bc").row(0), 1.0);
    Vec c = vec_tanh(ac);

    Vec h_out(h_in.size());
    for (std::size_t j = 0; j < h_out.size(); ++j)
        h_out[j] = (1.0 - z[j]) * h_in[j] + z[j] * c[j];

    if (cache) {
        cache->input_id = input_id;
        cache->x = std::move(x);
        cache->h_in = h_in;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->c = std::move(c);
        cache->h_out = h_out;
    }
    return h_out;
}

/// Returns dL/dh_in; accumulates decoder gradients.
Vec gru_step_backward(const ParamSet& dec, const GruStepCache& s, const Vec& g_h_out,
                      GradSet& grads) {
    const std::size_t d = s.h_in.size();
    Vec g_h(d, 0.0), g_z(d), g_c(d);
    for (std::size_t j = 0; j < d; ++j) {
        g_z[j] = g_h_out[j] * (s.c[j] - s.h_in[j]);
        g_c[j] = g_h_out[j] * s.z[j];
        g_h[j] = g_h_out[j] * (1.0 - s.z[j]);
    }
    Vec g_ac(d), g_az(d);
    for (std::size_t j = 0; j < d; ++j) {
        g_ac[j] = g_c[j] * (1.0 - s.c[j] * s.c[j]);
        g_az[j] = g_z[j] * s.z[j] * (1.0 - s.z[j]);
    }
    Vec rh = vec_hadamard(s.r, s.h_in);
    add_outer(grads.at("dec.gru_wc"), s.x, g_ac);
    add_outer(grads.at("dec.gru_uc"), rh, g_ac);
    axpy(grads.at("dec.gru_bc").row(0), g_ac, 1.0);
    Vec g_rh = vecmat_nt(g_ac, dec.at("dec.gru_uc"));
    Vec g_r(d), g_ar(d);
    for (std::size_t j = 0; j < d; ++j) {
        g_r[j] = g_rh[j] * s.h_in[j];
        g_h[j] += g_rh[j] * s.r[j];
        g_ar[j] = g_r[j] * s.r[j] * (1.0 - s.r[j]);
    }
    add_outer(grads.at("dec.gru_wr"), s.x, g_ar);
    add_outer(grads.at("dec.gru_ur"), s.h_in, g_ar);
    axpy(grads.at("dec.gru_br").row(0), g_ar, 1.0);
    add_outer(grads.at("dec.gru_wz"), s.x, g_az);
    add_outer(grads.at("dec.gru_uz"), s.h_in, g_az);
    axpy(grads.at("dec.gru_bz").row(0), g_az, 1.0);

    axpy(g_h, vecmat_nt(g_az, dec.at("dec.gru_uz")), 1.0);
    axpy(g_h, vecmat_nt(g_ar, dec.at("dec.gru_ur")), 1.0);

    Vec g_x = vecmat_nt(g_az, dec.at("dec.gru_wz"));
    axpy(g_x, vecmat_nt(g_ar, dec.at("dec.gru_wr")), 1.0);
    axpy(g_x, vecmat_nt(g_ac, dec.at("dec.gru_wc")), 1.0);
    axpy(grads.at("dec.word_embed").row(s.input_id), g_x, 1.0);
    return g_h;
}

Vec init_hidden(const ParamSet& dec, const Vec& v_t, Vec* pre_out) {
    Vec pre = vecmat(v_t, dec.at("dec.init_w"));
    axpy(pre, dec.at("dec.init_b").row(0), 1.0);
    Vec h = vec_tanh(pre);
    if (pre_out) *pre_out = h;  // tanh output is enough for the backward
    return h;
}

Vec output_logits(const ParamSet& dec, const Vec& h) {
    Vec logits = vecmat(h, dec.at("dec.out_w"));
    axpy(logits, dec.at("dec.out_b").row(0), 1.0);
    return logits;
}

}  // namespace

std::vector<std::size_t> decode_question_ids(const Vec& v_t, const ParamSet& dec,
                                             const Vocabulary& vocab, std::size_t max_len,
                                             Rng* sampler, double temperature) {
    if (max_len < 1) throw InvalidSpec("decode_question_ids: max_len >= 1");
    std::vector<std::size_t> out;
    Vec h = init_hidden(dec, v_t, nullptr);
    std::size_t prev = Vocabulary::kSos;
    for (std::size_t step = 0; step < max_len; ++step) {
        h = gru_step(dec, prev, h, nullptr);
        Vec logits = output_logits(dec, h);
        logits[Vocabulary::kPad] = -1e30;
        logits[Vocabulary::kCls] = -1e30;
        std::size_t next;
        if (sampler) {
            Vec scaled = logits;
            for (double& x : scaled) x /= temperature;
            Vec p = softmax(scaled);
            const double u = sampler->uniform();
            double acc = 0.0;
            next = p.size() - 1;
            for (std::size_t i = 0; i < p.size(); ++i) {
                acc += p[i];
                if (u < acc) {
                    next = i;
                    break;
                }
            }
        } else {
            next = static_cast<std::size_t>(std::distance(
                logits.begin(), std::max_element(logits.begin(), logits.end())));
        }
        if (next == Vocabulary::kEos) break;
        out.push_back(next);
        prev = next;
    }
    return out;
}

std::string decode_question(const Vec& v_t, const ParamSet& dec, const Vocabulary& vocab,
                            std::size_t max_len, Rng* sampler, double temperature) {
    const auto ids = decode_question_ids(v_t, dec, vocab, max_len, sampler, temperature);
    std::string text;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) text += ' ';
        text += vocab.token(ids[i]);
    }
    text += '?';
    return text;
}

Vec questioner_context(const QuestionerModel& model, const ObjectFeatureSet& feats,
                       const Vec& belief, VisDiffCache* cache) {
    Tensor2 projected = matmul(feats.rows, model.estimator.params.at("enc.vis_proj"));
    Tensor2 weighted = reweight_objects(projected, belief);
    return vis_diff(weighted, model.dec, cache);
}

namespace {

struct TurnDecodeCache {
    VisDiffCache vis;
    Tensor2 projected;
    Vec belief;
    Vec v_t;
    Vec h0;
    std::vector<GruStepCache> steps;
};

/// Forward pass of the teacher-forced decode for one turn.
double decode_turn_forward(const QuestionerModel& model, const std::string& question,
                           const ObjectFeatureSet& feats, const Vec& belief,
                           TurnDecodeCache* cache, std::size_t& token_count) {
    Tensor2 projected = matmul(feats.rows, model.estimator.params.at("enc.vis_proj"));
    Tensor2 weighted = reweight_objects(projected, belief);
    Vec v_t = vis_diff(weighted, model.dec, cache ? &cache->vis : nullptr);
    Vec h = init_hidden(model.dec, v_t, nullptr);

    std::vector<std::string> words = tokenize_question(question);
    if (words.size() > model.cfg.max_question_len - 1)
        words.resize(model.cfg.max_question_len - 1);
    std::vector<std::size_t> inputs{Vocabulary::kSos};
    std::vector<std::size_t> targets;
    for (const auto& w : words) {
        const std::size_t id = model.vocab().id(w);
        inputs.push_back(id);
        targets.push_back(id);
    }
    targets.push_back(Vocabulary::kEos);

    double loss = 0.0;
    if (cache) {
        cache->projected = std::move(projected);
        cache->belief = belief;
        cache->v_t = v_t;
        cache->h0 = h;
        cache->steps.resize(targets.size());
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        GruStepCache* sc = cache ? &cache->steps[t] : nullptr;
        h = gru_step(model.dec, inputs[t], h, sc);
        Vec logits = output_logits(model.dec, h);
        Vec probs = softmax(logits);
        loss += cross_entropy(probs, targets[t]);
        if (sc) {
            sc->probs = std::move(probs);
            sc->target = targets[t];
        }
        ++token_count;
    }
    return loss;
}

/// Backward; returns dL/dbelief for this turn's context path.
Vec decode_turn_backward(const QuestionerModel& model, const TurnDecodeCache& cache,
                         GradSet& dec_grads, GradSet* est_grads,
                         const ObjectFeatureSet& feats) {
    const std::size_t d = model.estimator.cfg.enc.hidden;
    Vec g_h(d, 0.0);
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
        const GruStepCache& s = cache.steps[t];
        Vec g_logits = ce_softmax_logits_grad(s.probs, s.target);
        add_outer(dec_grads.at("dec.out_w"), s.h_out, g_logits);
        axpy(dec_grads.at("dec.out_b").row(0), g_logits, 1.0);
        axpy(g_h, vecmat_nt(g_logits, model.dec.at("dec.out_w")), 1.0);
        g_h = gru_step_backward(model.dec, s, g_h, dec_grads);
    }
    // h0 = tanh(v_t * Wi + bi)
    Vec g_pre = vec_tanh_backward(cache.h0, g_h);
    add_outer(dec_grads.at("dec.init_w"), cache.v_t, g_pre);
    axpy(dec_grads.at("dec.init_b").row(0), g_pre, 1.0);
    Vec g_v = vecmat_nt(g_pre, model.dec.at("dec.init_w"));

    // v_t = merged * Wvd.
    add_outer(dec_grads.at("dec.visdiff_w"), cache.vis.merged, g_v);
    Vec g_merged = vecmat_nt(g_v, model.dec.at("dec.visdiff_w"));
    const std::size_t n = cache.vis.weighted.rows;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_n1 = 1.0 / static_cast<double>(n - 1);

    // d|d_i[j]|/dw_k[j] = s_i[j] * (N*delta_ik - 1)/(N-1), s = d/|d|.
    Tensor2 sign(n, d);
    Vec sign_sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto drow = cache.vis.diffs.row(i);
        auto srow = sign.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            srow[j] = drow[j] / std::sqrt(drow[j] * drow[j] + 1e-12);
            sign_sum[j] += srow[j];
        }
    }

    Vec g_belief(n, 0.0);
    Tensor2 g_projected(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto proj = cache.projected.row(i);
        auto srow = sign.row(i);
        auto dst = g_projected.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double g_w =
                g_merged[j] * inv_n +
                g_merged[d + j] * inv_n *
                    (static_cast<double>(n) * srow[j] - sign_sum[j]) * inv_n1;
            dst[j] = g_w * cache.belief[i];
            g_belief[i] += g_w * proj[j];
        }
    }
    if (est_grads)
        add_inplace(est_grads->at("enc.vis_proj"), matmul_tn(feats.rows, g_projected));
    return g_belief;
}

}  // namespace

double questioner_loss_grad(const QuestionerModel& model, const GameRecord& game,
                            const ObjectFeatureSet& feats, GradSet& dec_grads,
                            GradSet* est_grads, std::size_t& token_count) {
    if (game.turns.empty()) throw InvalidData("questioner_loss_grad: game has no turns");
    const std::size_t n = feats.rows.rows;
    const std::size_t turns = game.turns.size();

    // Forward: per-turn context from the estimator's belief on the gold prefix.
    std::vector<TurnDecodeCache> dec_caches(turns);
    std::vector<GuesserTurnCache> est_caches(est_grads ? turns : 0);
    BeliefState belief = BeliefState::uniform(n);
    double loss = 0.0;
    token_count = 0;
    for (std::size_t t = 0; t < turns; ++t) {
        loss += decode_turn_forward(model, game.turns[t].first, feats, belief.p,
                                    &dec_caches[t], token_count);
        if (t + 1 < turns) {
            belief = guesser_turn(model.estimator, game.turns[t].first, feats, belief,
                                  game.turns[t].second,
                                  est_grads ? &est_caches[t] : nullptr);
        }
    }

    // Backward through decode paths, chaining belief gradients through the
    // estimator unroll when it is trainable.
    Vec g_belief = decode_turn_backward(model, dec_caches[turns - 1], dec_grads,
                                        est_grads, feats);
    for (std::size_t t = turns - 1; t-- > 0;) {
        if (est_grads)
            g_belief = guesser_turn_backward(model.estimator, est_caches[t], g_belief,
                                             *est_grads);
        Vec g_local = decode_turn_backward(model, dec_caches[t], dec_grads, est_grads, feats);
        for (std::size_t i = 0; i < n; ++i) g_belief[i] += g_local[i];
    }
    return loss;
}

double questioner_token_ce(const QuestionerModel& model,
                           const std::vector<GameRecord>& games, const SceneIndex& scenes) {
    double loss = 0.0;
    std::size_t tokens = 0;
    for (const auto& g : games) {
        if (g.turns.empty()) continue;
        const auto& feats = scenes.features(g.scene_id);
        BeliefState belief = BeliefState::uniform(feats.rows.rows);
        for (std::size_t t = 0; t < g.turns.size(); ++t) {
            loss += decode_turn_forward(model, g.turns[t].first, feats, belief.p, nullptr,
                                        tokens);
            if (t + 1 < g.turns.size())
                belief = guesser_turn(model.estimator, g.turns[t].first, feats, belief,
                                      g.turns[t].second);
        }
    }
    return tokens == 0 ? 0.0 : loss / static_cast<double>(tokens);
}

TrainReport train_questioner(QuestionerModel& model,
                             const std::vector<GameRecord>& train_games,
                             const std::vector<GameRecord>& valid_games,
                             const SceneIndex& scenes, const TrainConfig& cfg) {
    std::vector<const GameRecord*> train;
    for (const auto& g : train_games)
        if (!g.turns.empty()) train.push_back(&g);
    if (train.empty()) throw InvalidData("train_questioner: no usable games");

    OptimizerState dec_opt;
    dec_opt.kind = cfg.optimizer;
    dec_opt.learning_rate = cfg.learning_rate;
    dec_opt.weight_decay = cfg.weight_decay;
    OptimizerState est_opt = dec_opt;

    const bool finetune = !model.cfg.freeze_estimator;
    TrainReport report;
    report.best_valid_accuracy = -1e300;
    ParamSet best_dec = model.dec;
    ParamSet best_est = model.estimator.params;
    int since_best = 0;
    Rng shuffle_rng(Rng::derive(cfg.seed, 0x9e57a));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train.size(); i > 1; --i)
            std::swap(train[i - 1], train[shuffle_rng.index(i)]);

        double loss_sum = 0.0;
        std::size_t token_sum = 0;
        GradSet dec_grads = ParamSet::zeros_like(model.dec);
        GradSet est_grads = ParamSet::zeros_like(model.estimator.params);
        for (const GameRecord* g : train) {
            dec_grads.fill_zero();
            if (finetune) est_grads.fill_zero();
            std::size_t tokens = 0;
            const double loss = questioner_loss_grad(model, *g, scenes.features(g->scene_id),
                                                     dec_grads, finetune ? &est_grads : nullptr,
                                                     tokens);
            loss_sum += loss;
            token_sum += tokens;
            const double scale = 1.0 / static_cast<double>(tokens);
            GradSet dec_scaled = ParamSet::zeros_like(dec_grads);
            dec_scaled.accumulate(dec_grads, scale);
            optimizer_step(model.dec, dec_scaled, dec_opt);
            if (finetune) {
                ParamSet est_scaled = ParamSet::zeros_like(est_grads);
                est_scaled.accumulate(est_grads, scale);
                optimizer_step(model.estimator.params, est_scaled, est_opt);
            }
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = token_sum == 0 ? 0.0 : loss_sum / static_cast<double>(token_sum);
        em.train_accuracy = -em.train_loss;
        em.valid_accuracy = valid_games.empty()
                                ? -em.train_loss
                                : -questioner_token_ce(model, valid_games, scenes);
        report.epochs.push_back(em);
        if (cfg.verbose)
            std::fprintf(stderr, "[questioner] epoch %d token-ce %.4f valid-ce %.4f\n",
                         epoch, em.train_loss, -em.valid_accuracy);

        if (em.valid_accuracy > report.best_valid_accuracy) {
            report.best_valid_accuracy = em.valid_accuracy;
            report.best_epoch = epoch;
            best_dec = model.dec;
            if (finetune) best_est = model.estimator.params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    model.dec = best_dec;
    if (finetune) model.estimator.params = best_est;
    return report;
}

}  // namespace gwlab
