#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "gwlab/dataset.hpp"

using namespace gwlab;

namespace {

GameRecord make_game(const std::string& id, const std::string& scene, int target,
                     std::vector<std::pair<std::string, AnswerClass>> turns, int guess) {
    GameRecord g;
    g.game_id = id;
    g.scene_id = scene;
    g.target_id = target;
    g.turns = std::move(turns);
    g.guess = guess;
    g.status = guess == target ? GameRecord::Status::Success : GameRecord::Status::Failure;
    return g;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("game log round trip preserves records") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g0", "s0", 1, {{"is it a dog?", AnswerClass::Yes}}, 1));
    games.push_back(make_game("g1", "s1", 0,
                              {{"is it red?", AnswerClass::No},
                               {"is it on the left?", AnswerClass::Yes}},
                              2));
    games[1].beliefs = {{0.5, 0.5}, {0.9, 0.1}};

    const std::string path = temp_path("gwlab_dataset_roundtrip.jsonl");
    write_games(games, path);
    const auto loaded = load_games(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].game_id == "g0");
    CHECK(loaded[0].status == GameRecord::Status::Success);
    CHECK(loaded[1].turns == games[1].turns);
    CHECK(loaded[1].beliefs == games[1].beliefs);

    // Write-load-write emits identical bytes.
    const std::string path2 = temp_path("gwlab_dataset_roundtrip2.jsonl");
    write_games(loaded, path2);
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("answers outside the closed class are parse errors") {
    CHECK_THROWS_AS(
        game_from_json_line(R"({"game_id":"g","scene_id":"s","target_id":0,)"
                            R"("turns":[["is it red?","maybe"]],"guess":0,"status":"success"})",
                            1),
        ParseError);
    CHECK_NOTHROW(
        game_from_json_line(R"({"game_id":"g","scene_id":"s","target_id":0,)"
                            R"("turns":[["is it red?","YES"]],"guess":0,"status":"success"})",
                            1));
}

TEST_CASE("schema invariants are enforced") {
    // success must mean guess == target.
    CHECK_THROWS_AS(
        game_from_json_line(R"({"game_id":"g","scene_id":"s","target_id":0,)"
                            R"("turns":[["is it red?","yes"]],"guess":1,"status":"success"})",
                            1),
        SchemaError);
    // completed games need turns.
    CHECK_THROWS_AS(game_from_json_line(R"({"game_id":"g","scene_id":"s","target_id":0,)"
                                        R"("turns":[],"guess":0,"status":"success"})",
                                        1),
                    SchemaError);
    // guess present iff completed.
    CHECK_THROWS_AS(
        game_from_json_line(R"({"game_id":"g","scene_id":"s","target_id":0,)"
                            R"("turns":[["is it red?","yes"]],"status":"failure"})",
                            1),
        SchemaError);
    CHECK_NOTHROW(game_from_json_line(
        R"({"game_id":"g","scene_id":"s","target_id":0,"turns":[],"status":"incomplete"})", 1));
}

TEST_CASE("empty file loads as an empty list") {
    const std::string path = temp_path("gwlab_dataset_empty.jsonl");
    std::ofstream(path).close();
    CHECK(load_games(path).empty());
    std::filesystem::remove(path);
}

TEST_CASE("parse errors carry the line number") {
    const std::string path = temp_path("gwlab_dataset_badline.jsonl");
    {
        std::ofstream out(path);
        out << R"({"game_id":"g","scene_id":"s","target_id":0,"turns":[["q","yes"]],"guess":0,"status":"success"})"
            << "\nnot json\n";
    }
    try {
        load_games(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("vocabulary over one question is specials plus three words") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g", "s", 0, {{"is it red?", AnswerClass::Yes}}, 0));
    const Vocabulary v = build_vocab(games, 1);
    CHECK(v.size() == 8);
    CHECK(v.token(0) == "[PAD]");
    CHECK(v.token(4) == "[CLS]");
    CHECK(v.id("is") == 5);
    CHECK(v.id("it") == 6);
    CHECK(v.id("red") == 7);
    CHECK(v.id("banana") == Vocabulary::kUnk);
}

TEST_CASE("min_freq filters rare tokens to UNK") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g", "s", 0,
                              {{"is it red?", AnswerClass::Yes},
                               {"is it blue?", AnswerClass::No}},
                              0));
    const Vocabulary v = build_vocab(games, 2);
    CHECK(v.contains("is"));
    CHECK(v.contains("it"));
    CHECK(!v.contains("red"));
    CHECK(v.id("red") == Vocabulary::kUnk);
}

TEST_CASE("vocabulary order is frequency then lexicographic, and stable") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g", "s", 0,
                              {{"is it red?", AnswerClass::Yes},
                               {"is it blue?", AnswerClass::No}},
                              0));
    const Vocabulary a = build_vocab(games, 1);
    const Vocabulary b = build_vocab(games, 1);
    CHECK(a == b);
    // is/it appear twice; blue/red once, lexicographic.
    CHECK(a.id("is") == 5);
    CHECK(a.id("it") == 6);
    CHECK(a.id("blue") == 7);
    CHECK(a.id("red") == 8);
}

TEST_CASE("question tokens prepend CLS and truncate") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g", "s", 0, {{"is it red?", AnswerClass::Yes}}, 0));
    const Vocabulary v = build_vocab(games, 1);
    const QuestionTokens t = to_question_tokens("is it red?", v, 12);
    CHECK(t.ids == std::vector<std::size_t>{Vocabulary::kCls, 5, 6, 7});
    CHECK(!t.truncated);

    const QuestionTokens u = to_question_tokens("is it red red red?", v, 3);
    CHECK(u.ids.size() == 3);
    CHECK(u.truncated);
}

TEST_CASE("extended vocabulary keeps existing ids") {
    std::vector<GameRecord> games;
    games.push_back(make_game("g", "s", 0, {{"is it red?", AnswerClass::Yes}}, 0));
    const Vocabulary v = build_vocab(games, 1);
    const Vocabulary w = v.extended({"yes", "no", "na"});
    CHECK(w.size() == v.size() + 3);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(w.token(i) == v.token(i));
    CHECK(w.contains("yes"));
}

TEST_CASE("split keeps scenes disjoint at the stated ratios") {
    std::vector<GameRecord> games;
    for (int s = 0; s < 100; ++s)
        for (int g = 0; g < 3; ++g)
            games.push_back(make_game("g" + std::to_string(s * 3 + g),
                                      "scene" + std::to_string(s), 0,
                                      {{"is it red?", AnswerClass::Yes}}, 0));

    const SplitResult split = split_games(games, {0.70, 0.15, 0.15}, 13);
    auto scene_set = [](const std::vector<GameRecord>& v) {
        std::set<std::string> out;
        for (const auto& g : v) out.insert(g.scene_id);
        return out;
    };
    const auto train = scene_set(split.train);
    const auto valid = scene_set(split.valid);
    const auto test = scene_set(split.test);
    CHECK(train.size() == 70);
    CHECK(valid.size() == 15);
    CHECK(test.size() == 15);
    for (const auto& s : valid) CHECK(!train.count(s));
    for (const auto& s : test) {
        CHECK(!train.count(s));
        CHECK(!valid.count(s));
    }
    CHECK(split.train.size() + split.valid.size() + split.test.size() == games.size());

    const SplitResult again = split_games(games, {0.70, 0.15, 0.15}, 13);
    CHECK(scene_set(again.train) == train);

    CHECK_THROWS_AS(split_games(games, {0.5, 0.2, 0.2}, 1), InvalidSpec);
}

}  // TEST_SUITE
