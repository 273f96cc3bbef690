// Contract tests against the actual binary.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwlab/dataset.hpp"

using namespace gwlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gwlab-cli-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GWLAB_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_cli_capture(const std::string& args, const std::string& out_file) {
    const std::string cmd =
        std::string(GWLAB_CLI_BIN) + " " + args + " >" + out_file + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status == 0);
    std::ifstream in(out_file);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-world writes the requested number of scenes deterministically") {
    TempDir dir;
    const std::string out1 = dir.file("a.jsonl");
    const std::string out2 = dir.file("b.jsonl");
    CHECK(run_cli("gen-world --scenes 100 --seed 7 --out " + out1) == 0);
    CHECK(line_count(out1) == 100);
    CHECK(run_cli("gen-world --scenes 100 --seed 7 --out " + out2) == 0);
    CHECK(read_bytes(out1) == read_bytes(out2));
}

TEST_CASE("unknown flags exit with the usage code") {
    CHECK(run_cli("gen-world --scenes 1 --out /tmp/x.jsonl --warp 9") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("") == 2);
}

TEST_CASE("runtime failures exit 1") {
    CHECK(run_cli("corrupt --in /nonexistent.jsonl --out /tmp/y.jsonl --ratio 0.5") == 1);
}

TEST_CASE("corrupt at ratio 0 copies the log byte for byte") {
    TempDir dir;
    const std::string scenes = dir.file("scenes.jsonl");
    const std::string gold = dir.file("gold.jsonl");
    REQUIRE(run_cli("gen-world --scenes 12 --seed 3 --out " + scenes + " --gold-out " +
                    gold) == 0);
    const std::string out = dir.file("corrupted.jsonl");
    CHECK(run_cli("corrupt --in " + gold + " --out " + out + " --ratio 0") == 0);
    CHECK(read_bytes(gold) == read_bytes(out));

    // Inputs are never mutated.
    const std::string before = read_bytes(gold);
    CHECK(run_cli("corrupt --in " + gold + " --out " + out + " --ratio 0.8 --seed 4") == 0);
    CHECK(read_bytes(gold) == before);
    CHECK(read_bytes(out) != before);
}

TEST_CASE("selfplay logs are byte-identical across runs and job counts") {
    TempDir dir;
    const std::string scenes = dir.file("scenes.jsonl");
    REQUIRE(run_cli("gen-world --scenes 16 --seed 11 --out " + scenes) == 0);
    const std::string log1 = dir.file("log1.jsonl");
    const std::string log2 = dir.file("log2.jsonl");
    const std::string base = "selfplay --scenes " + scenes +
                             " --oracle rule --guesser random --questioner scripted "
                             "--seed 21 --games-per-scene 2 --out ";
    CHECK(run_cli(base + log1 + " --jobs 1") == 0);
    CHECK(run_cli(base + log2 + " --jobs 4") == 0);
    CHECK(read_bytes(log1) == read_bytes(log2));
    CHECK(line_count(log1) == 32);
}

TEST_CASE("confusion reproduces the published fixture marginals") {
    // Build two logs whose joint success counts equal the published cells
    // (7565, 1993, 3573, 6864), then check the printed marginals.
    TempDir dir;
    std::vector<GameRecord> a, b;
    auto push = [&](long long count, bool a_ok, bool b_ok) {
        for (long long i = 0; i < count; ++i) {
            GameRecord g;
            g.game_id = "g" + std::to_string(a.size());
            g.scene_id = "s";
            g.target_id = 0;
            g.turns = {{"is it red?", AnswerClass::Yes}};
            g.guess = a_ok ? 0 : 1;
            g.status = a_ok ? GameRecord::Status::Success : GameRecord::Status::Failure;
            a.push_back(g);
            g.guess = b_ok ? 0 : 1;
            g.status = b_ok ? GameRecord::Status::Success : GameRecord::Status::Failure;
            b.push_back(g);
        }
    };
    push(7565, true, true);
    push(1993, true, false);
    push(3573, false, true);
    push(6864, false, false);
    const std::string log_a = dir.file("a.jsonl");
    const std::string log_b = dir.file("b.jsonl");
    write_games(a, log_a);
    write_games(b, log_b);

    const std::string json_out = dir.file("confusion.json");
    const std::string text = run_cli_capture(
        "confusion --log-a " + log_a + " --log-b " + log_b + " --out " + json_out,
        dir.file("stdout.txt"));
    CHECK(text.find("55.7%") != std::string::npos);
    CHECK(text.find("44.3%") != std::string::npos);
    CHECK(text.find("47.8%") != std::string::npos);
    CHECK(text.find("52.2%") != std::string::npos);

    const std::string json = read_bytes(json_out);
    CHECK(json.find("\"aa\":7565") != std::string::npos);
    CHECK(json.find("[47.8,52.2]") != std::string::npos);
    CHECK(json.find("[55.7,44.3]") != std::string::npos);
}

TEST_CASE("GWLAB_SEED acts as the master-seed fallback") {
    TempDir dir;
    const std::string with_flag = dir.file("flag.jsonl");
    const std::string with_env = dir.file("env.jsonl");
    REQUIRE(run_cli("gen-world --scenes 5 --seed 77 --out " + with_flag) == 0);
    const std::string cmd = std::string("GWLAB_SEED=77 ") + GWLAB_CLI_BIN +
                            " gen-world --scenes 5 --out " + with_env + " >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(read_bytes(with_flag) == read_bytes(with_env));
}

TEST_CASE("ablate writes the grid CSV") {
    TempDir dir;
    const std::string scenes = dir.file("scenes.jsonl");
    REQUIRE(run_cli("gen-world --scenes 8 --seed 5 --out " + scenes) == 0);
    const std::string csv = dir.file("grid.csv");
    CHECK(run_cli("ablate --scenes " + scenes +
                  " --oracles rule,noisy:0.5 --guessers random,random "
                  "--questioner scripted --seed 9 --out " +
                  csv) == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "oracle,guesser,success_rate");
    CHECK(line_count(csv) == 5);
}

}  // TEST_SUITE
