#include <doctest.h>

#include <algorithm>

#include "gwlab/questioner.hpp"

using namespace gwlab;

namespace {

Vocabulary fixture_vocab() {
    return Vocabulary().extended({"is", "it", "a", "red", "dog", "on", "the", "left"});
}

QuestionerModel tiny_questioner(std::uint64_t seed, bool freeze = true,
                                double init_range = 0.5) {
    GuesserConfig gcfg;
    gcfg.enc.hidden = 4;
    gcfg.enc.layers = 1;
    gcfg.enc.feat = FeatureLayout{}.dim();
    gcfg.answer_embed = 3;
    gcfg.head_hidden = 5;
    GuesserModel estimator = init_guesser(gcfg, fixture_vocab(), seed + 1);
    Rng erng(seed + 1);
    estimator.params.init_uniform(erng, init_range);

    QuestionerConfig qcfg;
    qcfg.word_embed = 4;
    qcfg.freeze_estimator = freeze;
    QuestionerModel model = init_questioner(qcfg, std::move(estimator), seed);
    Rng drng(seed);
    model.dec.init_uniform(drng, init_range);
    return model;
}

Scene fixture_scene(int n, std::uint64_t seed) {
    WorldSpec spec;
    spec.n_objects_min = n;
    spec.n_objects_max = n;
    return generate_scene(spec, seed);
}

}  // namespace

TEST_SUITE("questioner") {

TEST_CASE("reweight_objects scales rows by belief") {
    Tensor2 rows(2, 2);
    rows.data = {1.0, 1.0, 1.0, 1.0};
    const Tensor2 w = reweight_objects(rows, {0.8, 0.2});
    CHECK(w.row_vec(0) == Vec{0.8, 0.8});
    CHECK(w.row_vec(1) == Vec{0.2, 0.2});

    const Tensor2 uniform = reweight_objects(rows, {0.5, 0.5});
    for (double x : uniform.data) CHECK(x == doctest::Approx(0.5));

    const Tensor2 onehot = reweight_objects(rows, {1.0, 0.0});
    CHECK(onehot.row_vec(0) == Vec{1.0, 1.0});
    CHECK(onehot.row_vec(1) == Vec{0.0, 0.0});
}

TEST_CASE("vis_diff leave-one-out differences") {
    ParamSet dec;
    Tensor2& w = dec.add("dec.visdiff_w", 4, 2);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] = 0.1 * static_cast<double>(i + 1);

    // N=2: d_0 = r0 - r1 and d_1 = r1 - r0 (antisymmetric, so they sum to 0).
    Tensor2 rows(2, 2);
    rows.data = {1.0, 2.0, 0.5, -1.0};
    VisDiffCache cache;
    vis_diff(rows, dec, &cache);
    CHECK(cache.diffs.row_vec(0) == Vec{0.5, 3.0});
    CHECK(cache.diffs.row_vec(1) == Vec{-0.5, -3.0});
    CHECK(cache.diffs.at(0, 0) + cache.diffs.at(1, 0) == doctest::Approx(0.0));
    CHECK(cache.diffs.at(0, 1) + cache.diffs.at(1, 1) == doctest::Approx(0.0));
    // merged = mean(w_i) ++ mean(|d_i|).
    CHECK(cache.merged[0] == doctest::Approx(0.75));
    CHECK(cache.merged[1] == doctest::Approx(0.5));
    CHECK(cache.merged[2] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cache.merged[3] == doctest::Approx(3.0).epsilon(1e-6));

    // All rows identical: every d_i = 0, v_t = proj(mean ++ 0).
    Tensor2 same(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        same.at(i, 0) = 0.4;
        same.at(i, 1) = -0.2;
    }
    VisDiffCache cache2;
    const Vec v = vis_diff(same, dec, &cache2);
    CHECK(cache2.merged[2] == doctest::Approx(0.0));
    CHECK(cache2.merged[3] == doctest::Approx(0.0));
    Vec manual = vecmat({0.4, -0.2, 0.0, 0.0}, w);
    for (std::size_t j = 0; j < v.size(); ++j)
        CHECK(v[j] == doctest::Approx(manual[j]).epsilon(1e-4));

    Tensor2 one(1, 2);
    CHECK_THROWS_AS(vis_diff(one, dec, nullptr), InvalidScene);
}

TEST_CASE("vis_diff is invariant under object permutation") {
    QuestionerModel model = tiny_questioner(5);
    Tensor2 rows(4, 4);
    Rng rng(2);
    for (double& x : rows.data) x = rng.uniform(-1.0, 1.0);
    const Vec a = vis_diff(rows, model.dec, nullptr);

    Tensor2 reversed(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        auto src = rows.row(3 - i);
        std::copy(src.begin(), src.end(),
                  reversed.data.begin() + static_cast<std::ptrdiff_t>(i * 4));
    }
    const Vec b = vis_diff(reversed, model.dec, nullptr);
    for (std::size_t j = 0; j < a.size(); ++j)
        CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
}

TEST_CASE("greedy decode is deterministic and avoids PAD/CLS") {
    QuestionerModel model = tiny_questioner(8);
    Vec v_t(4, 0.3);
    const auto a = decode_question_ids(v_t, model.dec, model.vocab(), 12);
    const auto b = decode_question_ids(v_t, model.dec, model.vocab(), 12);
    CHECK(a == b);
    for (std::size_t id : a) {
        CHECK(id != Vocabulary::kPad);
        CHECK(id != Vocabulary::kCls);
    }
    const std::string text = decode_question(v_t, model.dec, model.vocab(), 12);
    CHECK(text == decode_question(v_t, model.dec, model.vocab(), 12));
    CHECK(text.back() == '?');
}

TEST_CASE("zero decoder parameters repeat one constant token") {
    QuestionerModel model = tiny_questioner(8);
    model.dec.fill_zero();
    Vec v_t(4, 0.0);
    const auto ids = decode_question_ids(v_t, model.dec, model.vocab(), 7);
    REQUIRE(ids.size() == 7);  // never hits EOS
    for (std::size_t id : ids) CHECK(id == ids[0]);
}

TEST_CASE("teacher-forced decoder gradient check, one turn and three tokens") {
    for (std::uint64_t seed : {7ULL, 11ULL, 13ULL}) {
        QuestionerModel model = tiny_questioner(seed);
        const Scene scene = fixture_scene(3, 300 + seed);
        const ObjectFeatureSet feats = object_features(scene, FeatureLayout{});
        GameRecord game;
        game.game_id = "g";
        game.scene_id = scene.scene_id;
        game.target_id = 0;
        game.turns = {{"is it red?", AnswerClass::Yes}};  // 3 tokens
        game.guess = 0;
        game.status = GameRecord::Status::Success;

        GradSet dec_grads = ParamSet::zeros_like(model.dec);
        std::size_t tokens = 0;
        questioner_loss_grad(model, game, feats, dec_grads, nullptr, tokens);
        CHECK(tokens == 4);  // 3 words + EOS

        QuestionerModel probe = model;
        auto loss_fn = [&](const ParamSet& p) {
            probe.dec = p;
            SceneIndex index({scene}, FeatureLayout{});
            return questioner_token_ce(probe, {game}, index) * static_cast<double>(tokens);
        };
        CHECK(grad_check(loss_fn, model.dec, dec_grads) <= 1e-4);
    }
}

TEST_CASE("fine-tuned estimator receives chain gradients") {
    QuestionerModel model = tiny_questioner(7, /*freeze=*/false);
    const Scene scene = fixture_scene(3, 310);
    const ObjectFeatureSet feats = object_features(scene, FeatureLayout{});
    GameRecord game;
    game.game_id = "g";
    game.scene_id = scene.scene_id;
    game.target_id = 0;
    game.turns = {{"is it red?", AnswerClass::Yes}, {"is it a dog?", AnswerClass::No}};
    game.guess = 0;
    game.status = GameRecord::Status::Success;

    GradSet dec_grads = ParamSet::zeros_like(model.dec);
    GradSet est_grads = ParamSet::zeros_like(model.estimator.params);
    std::size_t tokens = 0;
    questioner_loss_grad(model, game, feats, dec_grads, &est_grads, tokens);

    QuestionerModel probe = model;
    SceneIndex index({scene}, FeatureLayout{});
    auto loss_fn = [&](const ParamSet& p) {
        probe.estimator.params = p;
        return questioner_token_ce(probe, {game}, index) * static_cast<double>(tokens);
    };
    CHECK(grad_check(loss_fn, model.estimator.params, est_grads) <= 1e-4);
}

TEST_CASE("frozen training leaves the estimator untouched") {
    QuestionerModel model = tiny_questioner(9, /*freeze=*/true, 0.2);
    std::vector<Scene> scenes;
    std::vector<GameRecord> games;
    for (int i = 0; i < 4; ++i) {
        Scene s = fixture_scene(3, 600 + static_cast<std::uint64_t>(i));
        s.scene_id = "q-" + std::to_string(i);
        GameRecord g = generate_gold_dialog(s, 0, static_cast<std::uint64_t>(i), 3);
        g.scene_id = s.scene_id;
        games.push_back(g);
        scenes.push_back(std::move(s));
    }
    SceneIndex index(scenes, FeatureLayout{});

    std::vector<Vec> before;
    for (const auto& [name, t] : model.estimator.params) before.push_back(t.data);
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 9;
    train_questioner(model, games, {}, index, tc);
    std::size_t i = 0;
    for (const auto& [name, t] : model.estimator.params) CHECK(t.data == before[i++]);
}

TEST_CASE("sampling flag draws varied but seed-stable questions") {
    QuestionerModel model = tiny_questioner(12);
    Vec v_t(4, 0.1);
    Rng s1(5), s2(5), s3(6);
    const auto a = decode_question_ids(v_t, model.dec, model.vocab(), 10, &s1);
    const auto b = decode_question_ids(v_t, model.dec, model.vocab(), 10, &s2);
    CHECK(a == b);
    bool any_diff = false;
    for (int trial = 0; trial < 8 && !any_diff; ++trial)
        any_diff = decode_question_ids(v_t, model.dec, model.vocab(), 10, &s3) != a;
    CHECK(any_diff);
}

}  // TEST_SUITE
