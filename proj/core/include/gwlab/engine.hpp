#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gwlab/checkpoint.hpp"

namespace gwlab {

// ---- wiring -------------------------------------------------------------------

struct OracleWiring {
    enum class Kind { Rule, NoisyRule, Trained, Weak };
    Kind kind = Kind::Rule;
    double epsilon = 0.0;  // NoisyRule flip probability
    std::string ckpt_path;

    /// "rule" | "noisy:<eps>" | "trained:<ckpt>" | "weak:<ckpt>"
    static OracleWiring parse(const std::string& spec);
    std::string label() const;
};

struct GuesserWiring {
    enum class Kind { Trained, UniformRandom };
    Kind kind = Kind::UniformRandom;
    std::string ckpt_path;

    /// "trained:<ckpt>" | "random"
    static GuesserWiring parse(const std::string& spec);
    std::string label() const;
};

struct QuestionerWiring {
    enum class Kind { Trained, Scripted, Human };
    Kind kind = Kind::Scripted;
    std::string ckpt_path;

    /// "trained:<ckpt>" | "scripted" | "human"
    static QuestionerWiring parse(const std::string& spec);
    std::string label() const;
};

struct AgentWiring {
    OracleWiring oracle;
    GuesserWiring guesser;
    QuestionerWiring questioner;
};

struct GameConfig {
    int max_turns = 5;
    std::uint64_t master_seed = 0;
    bool export_beliefs = false;
};

/// Wiring with checkpoints materialized; trained agents must share one
/// vocabulary (IncompatibleCheckpoint otherwise).
struct LoadedWiring {
    AgentWiring spec;
    std::optional<OracleModel> oracle;
    std::optional<GuesserModel> guesser;
    std::optional<QuestionerModel> questioner;

    static LoadedWiring load(const AgentWiring& wiring);
};

// ---- self-play -----------------------------------------------------------------

struct GameTask {
    std::string game_id;
    std::string scene_id;
    int target_id = 0;
};

/// One task per (scene, repeat) with a seeded uniform target choice; targets
/// depend only on (master_seed, task index), so grids sharing a seed share
/// targets.
std::vector<GameTask> make_tasks(const SceneIndex& scenes, std::uint64_t master_seed,
                                 int games_per_scene);

/// Plays every task: belief starts uniform; up to max_turns of
/// question -> answer -> belief update; final guess is the belief argmax.
/// Per-game RNG streams derive from (master_seed, task index), so logs are a
/// pure function of (wiring, tasks, config) no matter the thread count.
std::vector<GameRecord> self_play(const LoadedWiring& wiring, const SceneIndex& scenes,
                                  const std::vector<GameTask>& tasks,
                                  const GameConfig& config, int jobs = 1);

/// Terminal game with a human in one seat. role is "oracle" or "questioner".
GameRecord interactive_play(const std::string& role, const LoadedWiring& wiring,
                            const SceneIndex& scenes, const GameTask& task,
                            const GameConfig& config, std::istream& in, std::ostream& out);

// ---- log io -------------------------------------------------------------------------

void write_log(const std::vector<GameRecord>& games, const std::string& path);
std::vector<GameRecord> read_log(const std::string& path);

}  // namespace gwlab
