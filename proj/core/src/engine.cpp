#include "gwlab/engine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <thread>

namespace gwlab {

// ---- wiring parsing --------------------------------------------------------------

namespace {

std::pair<std::string, std::string> split_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

}  // namespace

OracleWiring OracleWiring::parse(const std::string& spec) {
    auto [head, arg] = split_spec(spec);
    OracleWiring w;
    if (head == "rule" && arg.empty()) {
        w.kind = Kind::Rule;
    } else if (head == "noisy") {
        w.kind = Kind::NoisyRule;
        try {
            w.epsilon = std::stod(arg);
        } catch (const std::exception&) {
            throw InvalidSpec("oracle wiring: bad epsilon in '" + spec + "'");
        }
        if (w.epsilon < 0.0 || w.epsilon > 1.0)
            throw InvalidSpec("oracle wiring: epsilon out of [0,1]");
    } else if (head == "trained" && !arg.empty()) {
        w.kind = Kind::Trained;
        w.ckpt_path = arg;
    } else if (head == "weak" && !arg.empty()) {
        w.kind = Kind::Weak;
        w.ckpt_path = arg;
    } else {
        throw InvalidSpec("oracle wiring: expected rule|noisy:<eps>|trained:<ckpt>|weak:<ckpt>, got '" +
                          spec + "'");
    }
    return w;
}

std::string OracleWiring::label() const {
    switch (kind) {
        case Kind::Rule: return "rule";
        case Kind::NoisyRule: return "noisy:" + std::to_string(epsilon);
        case Kind::Trained: return "trained:" + ckpt_path;
        default: return "weak:" + ckpt_path;
    }
}

GuesserWiring GuesserWiring::parse(const std::string& spec) {
    auto [head, arg] = split_spec(spec);
    GuesserWiring w;
    if (head == "random" && arg.empty()) {
        w.kind = Kind::UniformRandom;
    } else if (head == "trained" && !arg.empty()) {
        w.kind = Kind::Trained;
        w.ckpt_path = arg;
    } else {
        throw InvalidSpec("guesser wiring: expected random|trained:<ckpt>, got '" + spec + "'");
    }
    return w;
}

std::string GuesserWiring::label() const {
    return kind == Kind::UniformRandom ? "random" : "trained:" + ckpt_path;
}

QuestionerWiring QuestionerWiring::parse(const std::string& spec) {
    auto [head, arg] = split_spec(spec);
    QuestionerWiring w;
    if (head == "scripted" && arg.empty()) {
        w.kind = Kind::Scripted;
    } else if (head == "human" && arg.empty()) {
        w.kind = Kind::Human;
    } else if (head == "trained" && !arg.empty()) {
        w.kind = Kind::Trained;
        w.ckpt_path = arg;
    } else {
        throw InvalidSpec("questioner wiring: expected scripted|human|trained:<ckpt>, got '" +
                          spec + "'");
    }
    return w;
}

std::string QuestionerWiring::label() const {
    switch (kind) {
        case Kind::Scripted: return "scripted";
        case Kind::Human: return "human";
        default: return "trained:" + ckpt_path;
    }
}

LoadedWiring LoadedWiring::load(const AgentWiring& wiring) {
    LoadedWiring lw;
    lw.spec = wiring;
    if (wiring.oracle.kind == OracleWiring::Kind::Trained ||
        wiring.oracle.kind == OracleWiring::Kind::Weak) {
        lw.oracle = load_oracle(wiring.oracle.ckpt_path);
        if (wiring.oracle.kind == OracleWiring::Kind::Weak && !lw.oracle->cfg.weak)
            throw IncompatibleCheckpoint("weak oracle wiring needs a weak-trained checkpoint");
    }
    if (wiring.guesser.kind == GuesserWiring::Kind::Trained)
        lw.guesser = load_guesser(wiring.guesser.ckpt_path);
    if (wiring.questioner.kind == QuestionerWiring::Kind::Trained)
        lw.questioner = load_questioner(wiring.questioner.ckpt_path);

    // Trained agents must agree on one vocabulary.
    const Vocabulary* ref = nullptr;
    auto check = [&](const Vocabulary& v, const char* who) {
        if (!ref) {
            ref = &v;
        } else if (!(*ref == v)) {
            throw IncompatibleCheckpoint(std::string("vocabulary mismatch at ") + who);
        }
    };
    if (lw.oracle) check(lw.oracle->vocab, "oracle");
    if (lw.guesser) check(lw.guesser->vocab, "guesser");
    if (lw.questioner) check(lw.questioner->vocab(), "questioner");
    return lw;
}

// ---- per-game agents ----------------------------------------------------------------

namespace {

AnswerClass wired_answer(const LoadedWiring& wiring, const Scene& scene,
                         const ObjectFeatureSet& feats, int target_id,
                         const std::string& question, Rng& rng) {
    switch (wiring.spec.oracle.kind) {
        case OracleWiring::Kind::Rule:
            return rule_answer(scene, target_id, parse_question(question));
        case OracleWiring::Kind::NoisyRule: {
            AnswerClass a = rule_answer(scene, target_id, parse_question(question));
            const bool flip = rng.coin(wiring.spec.oracle.epsilon);
            if (flip && a != AnswerClass::NA)
                a = a == AnswerClass::Yes ? AnswerClass::No : AnswerClass::Yes;
            return a;
        }
        default:
            return oracle_answer(*wiring.oracle, scene, feats, target_id, question);
    }
}

/// Questioner seat: emits questions, observes answers.
class QuestionerSeat {
public:
    QuestionerSeat(const LoadedWiring& wiring, const Scene& scene,
                   const ObjectFeatureSet& feats, std::uint64_t seed)
        : wiring_(&wiring), feats_(&feats) {
        if (wiring.spec.questioner.kind == QuestionerWiring::Kind::Scripted) {
            policy_.emplace(scene, seed);
        } else {
            belief_ = BeliefState::uniform(feats.rows.rows);
        }
    }

    std::optional<std::string> next() {
        if (policy_) {
            auto q = policy_->next_question();
            if (!q) return std::nullopt;
            pending_sem_ = q->second;
            return q->first;
        }
        const QuestionerModel& model = *wiring_->questioner;
        Vec v_t = questioner_context(model, *feats_, belief_.p);
        return decode_question(v_t, model.dec, model.vocab(), model.cfg.max_question_len);
    }

    void observe(const std::string& question, AnswerClass answer) {
        if (policy_) {
            policy_->observe(pending_sem_, answer);
        } else {
            belief_ = guesser_turn(wiring_->questioner->estimator, question, *feats_,
                                   belief_, answer);
        }
    }

private:
    const LoadedWiring* wiring_;
    const ObjectFeatureSet* feats_;
    std::optional<ScriptedQuestionPolicy> policy_;
    QuestionSemantics pending_sem_;
    BeliefState belief_;
};

/// Guesser seat: tracks belief over the dialog, produces the final guess.
class GuesserSeat {
public:
    GuesserSeat(const LoadedWiring& wiring, const ObjectFeatureSet& feats)
        : wiring_(&wiring), feats_(&feats) {
        belief_ = BeliefState::uniform(feats.rows.rows);
    }

    void observe(const std::string& question, AnswerClass answer) {
        if (wiring_->spec.guesser.kind == GuesserWiring::Kind::Trained)
            belief_ = guesser_turn(*wiring_->guesser, question, *feats_, belief_, answer);
        trajectory_.push_back(belief_.p);
    }

    int final_guess(Rng& rng) const {
        if (wiring_->spec.guesser.kind == GuesserWiring::Kind::UniformRandom)
            return static_cast<int>(rng.index(belief_.p.size()));
        return guess(belief_);
    }

    const std::vector<Vec>& trajectory() const { return trajectory_; }

private:
    const LoadedWiring* wiring_;
    const ObjectFeatureSet* feats_;
    BeliefState belief_;
    std::vector<Vec> trajectory_;
};

GameRecord play_one(const LoadedWiring& wiring, const SceneIndex& scenes,
                    const GameTask& task, const GameConfig& config, std::uint64_t stream) {
    const Scene& scene = scenes.scene(task.scene_id);
    const ObjectFeatureSet& feats = scenes.features(task.scene_id);
    Rng rng(Rng::derive(config.master_seed ^ 0x9e3779b97f4a7c15ULL, stream));

    QuestionerSeat questioner(wiring, scene, feats,
                              Rng::derive(config.master_seed, stream * 2 + 1));
    GuesserSeat guesser_seat(wiring, feats);

    GameRecord game;
    game.game_id = task.game_id;
    game.scene_id = task.scene_id;
    game.target_id = task.target_id;
    for (int t = 0; t < config.max_turns; ++t) {
        auto q = questioner.next();
        if (!q) break;
        const AnswerClass a = wired_answer(wiring, scene, feats, task.target_id, *q, rng);
        questioner.observe(*q, a);
        guesser_seat.observe(*q, a);
        game.turns.emplace_back(*q, a);
    }
    if (game.turns.empty()) {
        // A scripted questioner can find nothing informative; play one
        // category question so the record stays schema-valid.
        const int cat = scene.objects[static_cast<std::size_t>(task.target_id)].category;
        const std::string q = make_category_question(cat);
        const AnswerClass a = wired_answer(wiring, scene, feats, task.target_id, q, rng);
        questioner.observe(q, a);
        guesser_seat.observe(q, a);
        game.turns.emplace_back(q, a);
    }
    game.guess = guesser_seat.final_guess(rng);
    game.status = *game.guess == task.target_id ? GameRecord::Status::Success
                                                : GameRecord::Status::Failure;
    if (config.export_beliefs) game.beliefs = guesser_seat.trajectory();
    return game;
}

}  // namespace

std::vector<GameTask> make_tasks(const SceneIndex& scenes, std::uint64_t master_seed,
                                 int games_per_scene) {
    if (games_per_scene < 1) throw InvalidSpec("make_tasks: games_per_scene >= 1");
    std::vector<GameTask> tasks;
    std::size_t index = 0;
    for (const Scene& scene : scenes.scenes()) {
        for (int g = 0; g < games_per_scene; ++g, ++index) {
            Rng rng(Rng::derive(master_seed, index));
            GameTask task;
            task.game_id = "game-" + std::to_string(index);
            task.scene_id = scene.scene_id;
            task.target_id = static_cast<int>(rng.index(scene.objects.size()));
            tasks.push_back(std::move(task));
        }
    }
    return tasks;
}

std::vector<GameRecord> self_play(const LoadedWiring& wiring, const SceneIndex& scenes,
                                  const std::vector<GameTask>& tasks,
                                  const GameConfig& config, int jobs) {
    if (wiring.spec.questioner.kind == QuestionerWiring::Kind::Human)
        throw InvalidSpec("self_play: human questioner needs interactive_play");
    std::vector<GameRecord> games(tasks.size());
    if (jobs < 1) jobs = 1;
    jobs = std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size() ? tasks.size() : 1);

    auto worker = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < tasks.size(); i += stride)
            games[i] = play_one(wiring, scenes, tasks[i], config, i);
    };
    if (jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker, static_cast<std::size_t>(j), static_cast<std::size_t>(jobs));
        for (auto& t : pool) t.join();
    }
    return games;
}

GameRecord interactive_play(const std::string& role, const LoadedWiring& wiring,
                            const SceneIndex& scenes, const GameTask& task,
                            const GameConfig& config, std::istream& in, std::ostream& out) {
    const Scene& scene = scenes.scene(task.scene_id);
    const ObjectFeatureSet& feats = scenes.features(task.scene_id);
    Rng rng(Rng::derive(config.master_seed ^ 0x9e3779b97f4a7c15ULL, 0));

    out << "scene " << scene.scene_id << ":\n" << render_scene_text(scene);
    GameRecord game;
    game.game_id = task.game_id;
    game.scene_id = task.scene_id;
    game.target_id = task.target_id;

    GuesserSeat guesser_seat(wiring, feats);
    if (role == "oracle") {
        out << "you answer for target object " << task.target_id << "\n";
        QuestionerSeat questioner(wiring, scene, feats, Rng::derive(config.master_seed, 1));
        for (int t = 0; t < config.max_turns; ++t) {
            auto q = questioner.next();
            if (!q) break;
            out << "q" << (t + 1) << ": " << *q << "\n";
            AnswerClass a;
            while (true) {
                out << "answer (yes/no/n/a)> " << std::flush;
                std::string reply;
                if (!std::getline(in, reply)) return game;
                try {
                    a = answer_from_string(reply);
                    break;
                } catch (const ParseError&) {
                    out << "please type yes, no or n/a\n";
                }
            }
            questioner.observe(*q, a);
            guesser_seat.observe(*q, a);
            game.turns.emplace_back(*q, a);
        }
    } else if (role == "questioner") {
        out << "ask up to " << config.max_turns
            << " questions (empty line to stop early)\n";
        for (int t = 0; t < config.max_turns; ++t) {
            out << "question> " << std::flush;
            std::string q;
            if (!std::getline(in, q) || q.empty()) break;
            const AnswerClass a = wired_answer(wiring, scene, feats, task.target_id, q, rng);
            out << "oracle: " << to_string(a) << "\n";
            guesser_seat.observe(q, a);
            game.turns.emplace_back(q, a);
        }
    } else {
        throw InvalidSpec("interactive_play: role must be oracle or questioner");
    }

    if (game.turns.empty()) {
        game.status = GameRecord::Status::Incomplete;
        return game;
    }
    game.guess = guesser_seat.final_guess(rng);
    game.status = *game.guess == task.target_id ? GameRecord::Status::Success
                                                : GameRecord::Status::Failure;
    out << "guess: object " << *game.guess << " (" << to_string(game.status) << ")\n";
    return game;
}

void write_log(const std::vector<GameRecord>& games, const std::string& path) {
    write_games(games, path);
}

std::vector<GameRecord> read_log(const std::string& path) { return load_games(path); }

}  // namespace gwlab
