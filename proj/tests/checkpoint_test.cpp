#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gwlab/checkpoint.hpp"
#include "gwlab/config.hpp"

using namespace gwlab;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Vocabulary fixture_vocab() {
    return Vocabulary().extended({"is", "it", "red", "a", "dog"});
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

GuesserModel random_guesser(std::uint64_t seed) {
    GuesserConfig cfg;
    cfg.enc.hidden = 8;
    cfg.enc.layers = 1;
    cfg.enc.feat = FeatureLayout{}.dim();
    cfg.answer_embed = 4;
    return init_guesser(cfg, fixture_vocab(), seed);
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("guesser checkpoints round trip bitwise") {
    const GuesserModel model = random_guesser(3);
    const std::string p1 = temp_path("gwlab_ckpt_g1.bin");
    const std::string p2 = temp_path("gwlab_ckpt_g2.bin");
    save_guesser(model, p1);
    const GuesserModel loaded = load_guesser(p1);
    save_guesser(loaded, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));
    CHECK(loaded.vocab == model.vocab);
    CHECK(loaded.cfg.alpha == model.cfg.alpha);
    CHECK(loaded.params.same_layout(model.params));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("oracle checkpoints round trip") {
    OracleConfig cfg;
    cfg.enc.hidden = 8;
    cfg.enc.feat = FeatureLayout{}.dim();
    const OracleModel model = init_oracle(cfg, fixture_vocab(), 5);
    const std::string p1 = temp_path("gwlab_ckpt_o1.bin");
    const std::string p2 = temp_path("gwlab_ckpt_o2.bin");
    save_oracle(model, p1);
    save_oracle(load_oracle(p1), p2);
    CHECK(read_bytes(p1) == read_bytes(p2));
    CHECK(checkpoint_kind(p1) == "oracle");
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("questioner checkpoints embed the estimator bytes exactly") {
    GuesserModel estimator = random_guesser(7);
    const std::string gpath = temp_path("gwlab_ckpt_est.bin");
    save_guesser(estimator, gpath);
    const GuesserModel loaded_est = load_guesser(gpath);

    QuestionerConfig qcfg;
    qcfg.word_embed = 8;
    QuestionerModel model = init_questioner(qcfg, loaded_est, 9);
    const std::string qpath = temp_path("gwlab_ckpt_q.bin");
    save_questioner(model, qpath);
    const QuestionerModel loaded = load_questioner(qpath);

    // Estimator parameter floats survive the double round trip bit-exactly.
    auto ia = loaded.estimator.params.begin();
    auto ib = loaded_est.params.begin();
    for (; ia != loaded.estimator.params.end(); ++ia, ++ib)
        CHECK(ia->second.data == ib->second.data);

    const std::string qpath2 = temp_path("gwlab_ckpt_q2.bin");
    save_questioner(loaded, qpath2);
    CHECK(read_bytes(qpath) == read_bytes(qpath2));
    std::filesystem::remove(gpath);
    std::filesystem::remove(qpath);
    std::filesystem::remove(qpath2);
}

TEST_CASE("wrong format string is rejected") {
    const std::string path = temp_path("gwlab_ckpt_badfmt.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << R"({"format":"gwlab-ckpt-v0","model_kind":"oracle","manifest":[]})" << "\n";
    }
    CHECK_THROWS_AS(load_oracle(path), IncompatibleCheckpoint);
    std::filesystem::remove(path);
}

TEST_CASE("truncated checkpoints fail cleanly") {
    const GuesserModel model = random_guesser(11);
    const std::string path = temp_path("gwlab_ckpt_trunc.bin");
    save_guesser(model, path);
    const std::string bytes = read_bytes(path);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 17));
    }
    CHECK_THROWS_AS(load_guesser(path), IncompatibleCheckpoint);
    std::filesystem::remove(path);
}

TEST_CASE("manifest shape mismatch is rejected") {
    const GuesserModel model = random_guesser(13);
    const std::string path = temp_path("gwlab_ckpt_shape.bin");
    save_guesser(model, path);
    std::string bytes = read_bytes(path);
    const std::size_t pos = bytes.find("[3,4]");  // guesser.ans_embed shape
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, 5, "[4,3]");
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(load_guesser(path), IncompatibleCheckpoint);
    std::filesystem::remove(path);
}

TEST_CASE("kind mismatch is rejected") {
    const GuesserModel model = random_guesser(17);
    const std::string path = temp_path("gwlab_ckpt_kind.bin");
    save_guesser(model, path);
    CHECK_THROWS_AS(load_oracle(path), IncompatibleCheckpoint);
    std::filesystem::remove(path);
}

TEST_CASE("config parsing accepts the documented keys") {
    const RunConfig cfg = parse_config_text(
        "# experiment\n"
        "alpha = 0.9\n"
        "hidden_size = 16\n"
        "learning_rate = 0.005  # adamw step\n"
        "guesser_variant = pre_concatenation\n"
        "freeze_estimator = false\n",
        "test");
    CHECK(cfg.alpha == doctest::Approx(0.9));
    CHECK(cfg.hidden_size == 16);
    CHECK(cfg.learning_rate == doctest::Approx(0.005));
    CHECK(cfg.guesser_variant == GuesserVariant::PreConcatenation);
    CHECK(!cfg.freeze_estimator);
}

TEST_CASE("empty config keeps every default") {
    const RunConfig cfg = parse_config_text("", "test");
    const RunConfig def;
    CHECK(cfg.alpha == def.alpha);
    CHECK(cfg.hidden_size == def.hidden_size);
    CHECK(cfg.max_turns == def.max_turns);
    CHECK(cfg.answer_embed_size == def.answer_embed_size);
}

TEST_CASE("config rejections name the key") {
    CHECK_THROWS_AS(parse_config_text("alpha = 1.5\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("warp_drive = 1\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("alpha = 0.5\nalpha = 0.6\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("learning_rate = -1\n", "t"), ConfigError);
    try {
        parse_config_text("warp_drive = 1\n", "t");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
    }
}

}  // TEST_SUITE
