#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "gwlab/analysis.hpp"

using namespace gwlab;

namespace {

GameRecord game_with(const std::string& id, bool success,
                     std::vector<std::string> questions) {
    GameRecord g;
    g.game_id = id;
    g.scene_id = "s-" + id;
    g.target_id = 0;
    for (auto& q : questions) g.turns.emplace_back(std::move(q), AnswerClass::Yes);
    if (g.turns.empty()) g.turns.emplace_back("is it red?", AnswerClass::Yes);
    g.guess = success ? 0 : 1;
    g.status = success ? GameRecord::Status::Success : GameRecord::Status::Failure;
    return g;
}

// Independent brute-force BLEU used as the metric oracle: joins n-grams into
// strings and follows the textbook formula step by step.
double brute_force_bleu(const std::vector<std::string>& cand_refs_joined,
                        std::size_t cand_index, int max_n) {
    auto words_of = [](const std::string& text) {
        std::vector<std::string> w;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
            std::string low;
            for (char c : tok)
                if (c != '?') low.push_back(static_cast<char>(std::tolower(
                                  static_cast<unsigned char>(c))));
            if (!low.empty()) w.push_back(low);
        }
        return w;
    };
    const std::vector<std::string> cand = words_of(cand_refs_joined[cand_index]);
    if (cand.empty()) return 0.0;
    std::vector<std::vector<std::string>> refs;
    for (std::size_t j = 0; j < cand_refs_joined.size(); ++j)
        if (j != cand_index) refs.push_back(words_of(cand_refs_joined[j]));

    double product = 1.0;
    for (int n = 1; n <= max_n; ++n) {
        std::map<std::string, int> cand_counts;
        int total = 0;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cand.size(); ++i) {
            std::string key;
            for (int k = 0; k < n; ++k) key += cand[i + static_cast<std::size_t>(k)] + "\x1f";
            ++cand_counts[key];
            ++total;
        }
        if (total == 0) return 0.0;
        std::map<std::string, int> best_ref;
        for (const auto& ref : refs) {
            std::map<std::string, int> counts;
            for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= ref.size(); ++i) {
                std::string key;
                for (int k = 0; k < n; ++k) key += ref[i + static_cast<std::size_t>(k)] + "\x1f";
                ++counts[key];
            }
            for (const auto& [key, c] : counts) {
                auto& b = best_ref[key];
                b = std::max(b, c);
            }
        }
        int clipped = 0;
        for (const auto& [key, c] : cand_counts) {
            auto it = best_ref.find(key);
            if (it != best_ref.end()) clipped += std::min(c, it->second);
        }
        product *= static_cast<double>(clipped) / static_cast<double>(total);
    }
    const double geo = product <= 0.0 ? 0.0 : std::pow(product, 1.0 / max_n);

    std::size_t r = refs.front().size();
    const std::size_t c = cand.size();
    for (const auto& ref : refs) {
        auto dist = [&](std::size_t l) { return l > c ? l - c : c - l; };
        if (dist(ref.size()) < dist(r) || (dist(ref.size()) == dist(r) && ref.size() < r))
            r = ref.size();
    }
    const double bp =
        c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * geo;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("success rate arithmetic and recount") {
    std::vector<GameRecord> logs;
    for (int i = 0; i < 1000; ++i)
        logs.push_back(game_with("g" + std::to_string(i), i < 557, {"is it red?"}));
    CHECK(success_rate(logs) == doctest::Approx(55.7).epsilon(1e-12));

    std::size_t recount = 0;
    for (const auto& g : logs)
        if (g.guess == g.target_id) ++recount;
    CHECK(success_rate(logs) ==
          doctest::Approx(100.0 * static_cast<double>(recount) / 1000.0));

    std::vector<GameRecord> all_win{game_with("a", true, {}), game_with("b", true, {})};
    CHECK(success_rate(all_win) == 100.0);
    CHECK_THROWS_AS(success_rate({}), EmptyInput);
}

TEST_CASE("repeated question rate definition") {
    std::vector<GameRecord> logs;
    logs.push_back(game_with("a", true, {"is it red?", "is it blue?"}));
    logs.push_back(game_with("b", true, {"is it red?", "is it red?"}));
    CHECK(repeated_question_rate(logs) == doctest::Approx(50.0));

    // Normalization: case and the terminal '?' do not matter.
    std::vector<GameRecord> norm;
    norm.push_back(game_with("c", true, {"Is it red?", "is it red"}));
    CHECK(repeated_question_rate(norm) == doctest::Approx(100.0));

    // A triple repeat flags the game once.
    std::vector<GameRecord> triple;
    triple.push_back(game_with("d", true, {"is it red?", "is it red?", "is it red?"}));
    triple.push_back(game_with("e", true, {"is it blue?"}));
    CHECK(repeated_question_rate(triple) == doctest::Approx(50.0));

    std::vector<GameRecord> distinct;
    distinct.push_back(game_with("f", true, {"is it red?", "is it blue?"}));
    CHECK(repeated_question_rate(distinct) == 0.0);
}

TEST_CASE("question type distribution sums to 100") {
    std::vector<GameRecord> logs;
    logs.push_back(game_with("a", true,
                             {"is it a person?", "is it red?", "is it large?",
                              "is it on the left?", "does it hum?"}));
    const auto dist = question_type_distribution(logs);
    CHECK(dist.at("object") == doctest::Approx(20.0));
    CHECK(dist.at("color") == doctest::Approx(20.0));
    CHECK(dist.at("size") == doctest::Approx(20.0));
    CHECK(dist.at("location") == doctest::Approx(20.0));
    CHECK(dist.at("other") == doctest::Approx(20.0));
    double total = 0.0;
    for (const auto& [k, v] : dist) total += v;
    CHECK(total == doctest::Approx(100.0).epsilon(1e-9));

    std::vector<GameRecord> mono;
    mono.push_back(game_with("b", true, {"is it a person?"}));
    CHECK(question_type_distribution(mono).at("object") == doctest::Approx(100.0));
}

TEST_CASE("self bleu closed-form cases") {
    const auto identical = self_bleu({"is it red?", "is it red?", "is it red?"}, 4);
    for (int n = 2; n <= 4; ++n) CHECK(identical.at(n) == doctest::Approx(1.0));

    const auto singleton = self_bleu({"is it red?"}, 3);
    for (int n = 2; n <= 3; ++n) CHECK(singleton.at(n) == 0.0);

    // Unigram precision 2/3, bigram 1/2, geometric mean sqrt(1/3).
    const auto pair = self_bleu({"is it red", "is it blue"}, 2);
    CHECK(pair.at(2) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-9));
    CHECK(pair.at(2) == doctest::Approx(0.5774).epsilon(1e-4));
}

TEST_CASE("self bleu matches the brute-force oracle on random sets") {
    const std::vector<std::string> pool = {
        "is it red?",          "is it blue?",          "is it a dog?",
        "is it a person?",     "is it on the left?",   "is it on the right?",
        "is it large?",        "is it small?",         "is it the dog on the left?",
        "is it green?",        "is it a ball?",        "is it on the top?"};
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> questions;
        const std::size_t k = 2 + rng.index(5);
        for (std::size_t i = 0; i < k; ++i) questions.push_back(pool[rng.index(pool.size())]);
        for (int n = 2; n <= 4; ++n) {
            const auto mine = self_bleu(questions, n);
            double brute = 0.0;
            for (std::size_t i = 0; i < questions.size(); ++i)
                brute += brute_force_bleu(questions, i, n);
            brute /= static_cast<double>(questions.size());
            CHECK(mine.at(n) == doctest::Approx(brute).epsilon(1e-9));
        }
    }
}

TEST_CASE("adding an exact duplicate never lowers self bleu") {
    const std::vector<std::string> base = {"is it red?", "is it a dog?", "is it large?"};
    std::vector<std::string> extended = base;
    extended.push_back("is it red?");
    const auto a = self_bleu(base, 3);
    const auto b = self_bleu(extended, 3);
    for (int n = 2; n <= 3; ++n) CHECK(b.at(n) >= a.at(n) - 1e-12);
}

TEST_CASE("corruption identity, totality and exact count") {
    std::vector<GameRecord> games;
    games.push_back(game_with("a", true, {"q1?", "q2?", "q3?"}));
    games.back().turns[1].second = AnswerClass::No;
    games.back().turns[2].second = AnswerClass::NA;
    games.push_back(game_with("b", true, {"q4?", "q5?", "q6?", "q7?"}));
    games.push_back(game_with("c", true, {"q8?", "q9?", "q10?"}));

    // ratio 0: byte-identical output.
    const auto same = corrupt_answers(games, {0.0, 9});
    REQUIRE(same.size() == games.size());
    for (std::size_t i = 0; i < games.size(); ++i)
        CHECK(game_to_json_line(same[i]) == game_to_json_line(games[i]));

    // ratio 1: every Yes/No flips, every NA becomes Yes or No.
    const auto flipped = corrupt_answers(games, {1.0, 9});
    for (std::size_t i = 0; i < games.size(); ++i) {
        for (std::size_t t = 0; t < games[i].turns.size(); ++t) {
            const AnswerClass before = games[i].turns[t].second;
            const AnswerClass after = flipped[i].turns[t].second;
            if (before == AnswerClass::Yes) CHECK(after == AnswerClass::No);
            if (before == AnswerClass::No) CHECK(after == AnswerClass::Yes);
            if (before == AnswerClass::NA) CHECK(after != AnswerClass::NA);
        }
    }

    // 10 answers at ratio 0.3 -> exactly 3 changed positions.
    const auto partial = corrupt_answers(games, {0.3, 5});
    std::size_t changed = 0;
    for (std::size_t i = 0; i < games.size(); ++i)
        for (std::size_t t = 0; t < games[i].turns.size(); ++t)
            if (partial[i].turns[t].second != games[i].turns[t].second) ++changed;
    CHECK(changed == 3);

    // Questions and every other field are untouched.
    for (std::size_t i = 0; i < games.size(); ++i) {
        CHECK(partial[i].game_id == games[i].game_id);
        CHECK(partial[i].guess == games[i].guess);
        for (std::size_t t = 0; t < games[i].turns.size(); ++t)
            CHECK(partial[i].turns[t].first == games[i].turns[t].first);
    }
}

TEST_CASE("corruption ratio 1 with NA uses seeded coins deterministically") {
    std::vector<GameRecord> games;
    games.push_back(game_with("a", true, {"q?", "q2?"}));
    games.back().turns[0].second = AnswerClass::NA;
    games.back().turns[1].second = AnswerClass::NA;
    const auto x = corrupt_answers(games, {1.0, 42});
    const auto y = corrupt_answers(games, {1.0, 42});
    CHECK(game_to_json_line(x[0]) == game_to_json_line(y[0]));
}

TEST_CASE("confusion matrix reproduces the published marginals") {
    auto round1 = [](double x) { return std::round(x * 10.0) / 10.0; };

    ConfusionMatrix2 t2{8391, 1194, 1167, 9243};
    CHECK(round1(t2.row_marginals_pct()[0]) == doctest::Approx(47.9));
    CHECK(round1(t2.row_marginals_pct()[1]) == doctest::Approx(52.1));
    CHECK(round1(t2.col_marginals_pct()[0]) == doctest::Approx(47.8));
    CHECK(round1(t2.col_marginals_pct()[1]) == doctest::Approx(52.2));

    ConfusionMatrix2 t3{7565, 1993, 3573, 6864};
    CHECK(round1(t3.row_marginals_pct()[0]) == doctest::Approx(47.8));
    CHECK(round1(t3.row_marginals_pct()[1]) == doctest::Approx(52.2));
    CHECK(round1(t3.col_marginals_pct()[0]) == doctest::Approx(55.7));
    CHECK(round1(t3.col_marginals_pct()[1]) == doctest::Approx(44.3));
}

TEST_CASE("confusion join counts cells and rejects mismatched sets") {
    std::vector<GameRecord> a, b;
    a.push_back(game_with("g1", true, {}));
    a.push_back(game_with("g2", true, {}));
    a.push_back(game_with("g3", false, {}));
    a.push_back(game_with("g4", false, {}));
    b.push_back(game_with("g1", true, {}));
    b.push_back(game_with("g2", false, {}));
    b.push_back(game_with("g3", true, {}));
    b.push_back(game_with("g4", false, {}));
    const ConfusionMatrix2 m = confusion_matrix(a, b);
    CHECK(m.aa == 1);
    CHECK(m.ab == 1);
    CHECK(m.ba == 1);
    CHECK(m.bb == 1);

    const ConfusionMatrix2 self = confusion_matrix(a, a);
    CHECK(self.ab == 0);
    CHECK(self.ba == 0);
    CHECK(self.aa + self.bb == 4);

    b.push_back(game_with("g5", true, {}));
    CHECK_THROWS_AS(confusion_matrix(a, b), JoinError);
}

TEST_CASE("interaction delta reproduces the published table arithmetic") {
    CHECK(interaction_delta(47.7, 47.8, 47.5, 55.7) == doctest::Approx(7.9).epsilon(1e-9));
    CHECK(interaction_delta(50.0, 60.0, 55.0, 61.0) == doctest::Approx(1.0));
}

TEST_CASE("ablation grid with identical wirings has equal cells") {
    WorldSpec spec;
    std::vector<Scene> scenes;
    for (int i = 0; i < 10; ++i) {
        Scene s = generate_scene(spec, 800 + static_cast<std::uint64_t>(i));
        s.scene_id = "ab-" + std::to_string(i);
        scenes.push_back(std::move(s));
    }
    SceneIndex index(std::move(scenes), FeatureLayout{});
    GameConfig config;
    config.master_seed = 12;
    const auto tasks = make_tasks(index, config.master_seed, 2);
    const AblationGrid grid = ablation_grid(
        {OracleWiring::parse("rule"), OracleWiring::parse("rule")},
        {GuesserWiring::parse("random"), GuesserWiring::parse("random")},
        QuestionerWiring::parse("scripted"), index, tasks, config, 2);
    REQUIRE(grid.success.size() == 2);
    CHECK(grid.success[0][0] == grid.success[0][1]);
    CHECK(grid.success[0][0] == grid.success[1][0]);
    CHECK(grid.success[0][0] == grid.success[1][1]);
    REQUIRE(grid.interaction.has_value());
    CHECK(*grid.interaction == doctest::Approx(0.0));

    const std::string csv = grid_to_csv(grid);
    CHECK(csv.find("oracle,guesser,success_rate\n") == 0);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 5);  // header + 4 cells
}

TEST_CASE("sweep emits one row per guesser, ratio and seed") {
    // Wiring-level check of the row shape with an untrained guesser.
    GuesserConfig cfg;
    cfg.enc.hidden = 4;
    cfg.enc.feat = FeatureLayout{}.dim();
    GuesserModel model = init_guesser(cfg, Vocabulary().extended({"is", "it", "red"}), 1);

    WorldSpec spec;
    std::vector<Scene> scenes;
    std::vector<GameRecord> games;
    for (int i = 0; i < 4; ++i) {
        Scene s = generate_scene(spec, 900 + static_cast<std::uint64_t>(i));
        s.scene_id = "sw-" + std::to_string(i);
        GameRecord g = generate_gold_dialog(s, 0, static_cast<std::uint64_t>(i), 3);
        g.scene_id = s.scene_id;
        games.push_back(g);
        scenes.push_back(std::move(s));
    }
    SceneIndex index(std::move(scenes), FeatureLayout{});
    const auto rows = corruption_sweep({{"m", &model}}, games, index, {0.0, 0.5}, {1, 2, 3});
    CHECK(rows.size() == 6);

    // ratio 0 equals the uncorrupted accuracy for every seed.
    const double clean = 100.0 * eval_guesser(model, games, index);
    for (const auto& row : rows)
        if (row.ratio == 0.0) CHECK(row.accuracy == doctest::Approx(clean));

    const std::string csv = sweep_to_csv(rows);
    CHECK(csv.find("guesser,ratio,seed,accuracy\n") == 0);
}

}  // TEST_SUITE
