#include "gwlab/oracle.hpp"

#include <algorithm>
#include <cstdio>

namespace gwlab {

namespace {

void add_oracle_params(ParamSet& params, const OracleConfig& cfg) {
    add_encoder_params(params, cfg.enc);
    const std::size_t d = cfg.enc.hidden;
    const std::size_t c = cfg.category_embed;
    params.add("oracle.cat_embed", static_cast<std::size_t>(cfg.n_categories), c);
    params.add("oracle.mlp_w1", 2 * d + c, cfg.mlp_hidden);
    params.add("oracle.mlp_b1", 1, cfg.mlp_hidden);
    params.add("oracle.mlp_w2", cfg.mlp_hidden, 3);
    params.add("oracle.mlp_b2", 1, 3);
}

struct OracleForwardCache {
    EncoderCache enc;
    EncoderOutput out;
    Vec fusion;
    Vec hidden;  // post-tanh
    Vec probs;
};

Vec fusion_of(const EncoderOutput& enc, int target_category, const OracleModel& model) {
    const std::size_t d = model.cfg.enc.hidden;
    if (target_category < 0 || target_category >= model.cfg.n_categories)
        throw InvalidCategory("oracle_fusion: unknown category " +
                              std::to_string(target_category));
    const Tensor2& cat = model.params.at("oracle.cat_embed");
    Vec x(2 * d + cat.cols);
    if (!model.cfg.weak) {
        const Vec tgt = enc.h_tgt();
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = enc.h_img[j] * enc.h_cls[j];
            x[d + j] = tgt[j] * enc.h_cls[j];
        }
    }
    auto crow = cat.row(static_cast<std::size_t>(target_category));
    std::copy(crow.begin(), crow.end(), x.begin() + static_cast<std::ptrdiff_t>(2 * d));
    return x;
}

Vec head_forward(const Vec& fusion, const OracleModel& model, Vec* hidden_out) {
    Vec pre = vecmat(fusion, model.params.at("oracle.mlp_w1"));
    axpy(pre, model.params.at("oracle.mlp_b1").row(0), 1.0);
    Vec hidden = vec_tanh(pre);
    Vec logits = vecmat(hidden, model.params.at("oracle.mlp_w2"));
    axpy(logits, model.params.at("oracle.mlp_b2").row(0), 1.0);
    if (hidden_out) *hidden_out = std::move(hidden);
    return softmax(logits);
}

OracleForwardCache forward_cached(const OracleModel& model, const QuestionTokens& tokens,
                                  const ObjectFeatureSet& feats, int target_id,
                                  int target_category) {
    OracleForwardCache fc;
    fc.out = encode(tokens, feats, model.params, model.cfg.enc, EncodeMode::Oracle,
                    target_id, &fc.enc);
    fc.fusion = fusion_of(fc.out, target_category, model);
    fc.probs = head_forward(fc.fusion, model, &fc.hidden);
    return fc;
}

}  // namespace

OracleModel init_oracle(const OracleConfig& cfg, const Vocabulary& vocab,
                        std::uint64_t seed) {
    OracleModel model;
    model.cfg = cfg;
    model.cfg.enc.vocab = vocab.size();
    model.vocab = vocab;
    Rng rng(seed);
    add_oracle_params(model.params, model.cfg);
    model.params.init_uniform(rng, 0.08);
    return model;
}

Vec oracle_fusion(const EncoderOutput& enc, int target_category, const OracleModel& model) {
    return fusion_of(enc, target_category, model);
}

Vec oracle_predict(const Vec& fusion, const OracleModel& model) {
    require_finite(fusion, "oracle_predict fusion");
    return head_forward(fusion, model, nullptr);
}

Vec oracle_forward(const OracleModel& model, const QuestionTokens& tokens,
                   const ObjectFeatureSet& feats, int target_id, int target_category) {
    return forward_cached(model, tokens, feats, target_id, target_category).probs;
}

double oracle_loss_grad(const OracleModel& model, const QuestionTokens& tokens,
                        const ObjectFeatureSet& feats, int target_id,
                        int target_category, AnswerClass label, GradSet& grads) {
    OracleForwardCache fc = forward_cached(model, tokens, feats, target_id, target_category);
    const std::size_t lbl = static_cast<std::size_t>(label);
    const double loss = cross_entropy(fc.probs, lbl);

    Vec g_logits = ce_softmax_logits_grad(fc.probs, lbl);
    add_outer(grads.at("oracle.mlp_w2"), fc.hidden, g_logits);
    axpy(grads.at("oracle.mlp_b2").row(0), g_logits, 1.0);
    Vec g_hidden = vecmat_nt(g_logits, model.params.at("oracle.mlp_w2"));
    Vec g_pre = vec_tanh_backward(fc.hidden, g_hidden);
    add_outer(grads.at("oracle.mlp_w1"), fc.fusion, g_pre);
    axpy(grads.at("oracle.mlp_b1").row(0), g_pre, 1.0);
    Vec g_fusion = vecmat_nt(g_pre, model.params.at("oracle.mlp_w1"));

    const std::size_t d = model.cfg.enc.hidden;
    auto g_cat = grads.at("oracle.cat_embed").row(static_cast<std::size_t>(target_category));
    for (std::size_t j = 0; j < g_cat.size(); ++j) g_cat[j] += g_fusion[2 * d + j];

    if (!model.cfg.weak) {
        EncoderOutputGrads gout;
        gout.g_img.assign(d, 0.0);
        gout.g_cls.assign(d, 0.0);
        gout.g_obj = Tensor2(fc.out.h_obj.rows, d);
        const Vec tgt = fc.out.h_tgt();
        auto g_tgt = gout.g_obj.row(static_cast<std::size_t>(fc.out.target_row));
        for (std::size_t j = 0; j < d; ++j) {
            gout.g_img[j] = g_fusion[j] * fc.out.h_cls[j];
            g_tgt[j] = g_fusion[d + j] * fc.out.h_cls[j];
            gout.g_cls[j] = g_fusion[j] * fc.out.h_img[j] + g_fusion[d + j] * tgt[j];
        }
        encode_backward(fc.enc, gout, model.params, model.cfg.enc, grads);
    }
    return loss;
}

namespace {

struct Sample {
    const GameRecord* game;
    std::size_t turn;
};

std::vector<Sample> collect_samples(const std::vector<GameRecord>& games) {
    std::vector<Sample> samples;
    for (const auto& g : games)
        for (std::size_t t = 0; t < g.turns.size(); ++t) samples.push_back({&g, t});
    return samples;
}

double accuracy_on(const OracleModel& model, const std::vector<Sample>& samples,
                   const SceneIndex& scenes) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& s : samples) {
        const Scene& scene = scenes.scene(s.game->scene_id);
        const auto& feats = scenes.features(s.game->scene_id);
        const auto& [question, answer] = s.game->turns[s.turn];
        const int cat =
            scene.objects[static_cast<std::size_t>(s.game->target_id)].category;
        QuestionTokens toks =
            to_question_tokens(question, model.vocab, model.cfg.max_question_len);
        Vec p = oracle_forward(model, toks, feats, s.game->target_id, cat);
        const auto pred = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
        if (pred == static_cast<std::ptrdiff_t>(answer)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace

TrainReport train_oracle(OracleModel& model, const std::vector<GameRecord>& train_games,
                         const std::vector<GameRecord>& valid_games,
                         const SceneIndex& scenes, const TrainConfig& cfg) {
    std::vector<Sample> train = collect_samples(train_games);
    std::vector<Sample> valid = collect_samples(valid_games);
    if (train.empty()) throw InvalidData("train_oracle: no training samples");

    OptimizerState opt;
    opt.kind = cfg.optimizer;
    opt.learning_rate = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;

    TrainReport report;
    ParamSet best = model.params;
    int since_best = 0;
    Rng shuffle_rng(Rng::derive(cfg.seed, 0x07ac1e));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train.size(); i > 1; --i)
            std::swap(train[i - 1], train[shuffle_rng.index(i)]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        GradSet grads = ParamSet::zeros_like(model.params);
        for (const auto& s : train) {
            const Scene& scene = scenes.scene(s.game->scene_id);
            const auto& feats = scenes.features(s.game->scene_id);
            const auto& [question, answer] = s.game->turns[s.turn];
            const int cat =
                scene.objects[static_cast<std::size_t>(s.game->target_id)].category;
            QuestionTokens toks =
                to_question_tokens(question, model.vocab, model.cfg.max_question_len);
            grads.fill_zero();
            const double loss = oracle_loss_grad(model, toks, feats, s.game->target_id,
                                                 cat, answer, grads);
            loss_sum += loss;
            optimizer_step(model.params, grads, opt);
        }
        // Training accuracy measured after the epoch's updates.
        correct = 0;
        for (const auto& s : train) {
            const Scene& scene = scenes.scene(s.game->scene_id);
            const auto& feats = scenes.features(s.game->scene_id);
            const auto& [question, answer] = s.game->turns[s.turn];
            const int cat =
                scene.objects[static_cast<std::size_t>(s.game->target_id)].category;
            QuestionTokens toks =
                to_question_tokens(question, model.vocab, model.cfg.max_question_len);
            Vec p = oracle_forward(model, toks, feats, s.game->target_id, cat);
            const auto pred = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
            if (pred == static_cast<std::ptrdiff_t>(answer)) ++correct;
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_sum / static_cast<double>(train.size());
        em.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
        em.valid_accuracy = valid.empty() ? em.train_accuracy
                                          : accuracy_on(model, valid, scenes);
        report.epochs.push_back(em);
        if (cfg.verbose)
            std::fprintf(stderr, "[oracle] epoch %d loss %.4f train %.3f valid %.3f\n",
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

OracleEvalReport eval_oracle(const OracleModel& model, const std::vector<GameRecord>& games,
                             const SceneIndex& scenes) {
    static const char* kTypes[] = {"object", "color", "size", "location", "other"};
    OracleEvalReport report;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // correct, total
    for (const char* t : kTypes) counts[t] = {0, 0};

    std::size_t correct_all = 0;
    for (const auto& g : games) {
        const Scene& scene = scenes.scene(g.scene_id);
        const auto& feats = scenes.features(g.scene_id);
        const int cat = scene.objects[static_cast<std::size_t>(g.target_id)].category;
        for (const auto& [question, answer] : g.turns) {
            QuestionTokens toks =
                to_question_tokens(question, model.vocab, model.cfg.max_question_len);
            Vec p = oracle_forward(model, toks, feats, g.target_id, cat);
            const auto pred = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
            const bool ok = pred == static_cast<std::ptrdiff_t>(answer);

            const QuestionSemantics sem = parse_question(question);
            const char* type = "other";
            switch (sem.kind) {
                case QuestionSemantics::Kind::Category: type = "object"; break;
                case QuestionSemantics::Kind::Color: type = "color"; break;
                case QuestionSemantics::Kind::SizeClass: type = "size"; break;
                case QuestionSemantics::Kind::LocationHalf: type = "location"; break;
                default: type = "other"; break;
            }
            auto& [c, t] = counts[type];
            ++t;
            if (ok) ++c, ++correct_all;
            ++report.total;
        }
    }
    report.overall = report.total == 0
                         ? 0.0
                         : static_cast<double>(correct_all) / static_cast<double>(report.total);
    for (const char* t : kTypes) {
        const auto& [c, n] = counts[t];
        report.by_type[t] = {n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n), n};
    }
    return report;
}

AnswerClass oracle_answer(const OracleModel& model, const Scene& scene,
                          const ObjectFeatureSet& feats, int target_id,
                          const std::string& question) {
    const int cat = scene.objects[static_cast<std::size_t>(target_id)].category;
    QuestionTokens toks = to_question_tokens(question, model.vocab, model.cfg.max_question_len);
    Vec p = oracle_forward(model, toks, feats, target_id, cat);
    const auto pred = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
    return static_cast<AnswerClass>(pred);
}

}  // namespace gwlab
