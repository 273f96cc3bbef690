// gwlab: synthetic three-agent guessing-game laboratory.
//
// One binary, subcommand style. Every subcommand is deterministic given its
// inputs, flags and seeds; no subcommand mutates its input files.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwlab/analysis.hpp"
#include "gwlab/config.hpp"

using namespace gwlab;

namespace {

std::uint64_t env_master_seed() {
    const char* s = std::getenv("GWLAB_SEED");
    if (!s || !*s) return 0;
    try {
        return static_cast<std::uint64_t>(std::stoull(s));
    } catch (const std::exception&) {
        throw ConfigError("GWLAB_SEED: bad integer '" + std::string(s) + "'");
    }
}

RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::string>& overrides, bool seed_given,
                         std::uint64_t seed_flag) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given)
        cfg.seed = seed_flag;
    else if (cfg.seed == 0)
        cfg.seed = env_master_seed();
    return cfg;
}

TrainConfig train_config_of(const RunConfig& cfg, bool verbose) {
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.weight_decay = cfg.weight_decay;
    tc.optimizer = cfg.optimizer;
    tc.seed = cfg.seed;
    tc.patience = cfg.patience;
    tc.verbose = verbose;
    return tc;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
}

std::vector<GameRecord> filter_success(const std::vector<GameRecord>& games,
                                       bool use_failed) {
    if (use_failed) return games;
    std::vector<GameRecord> out;
    for (const auto& g : games)
        if (g.status == GameRecord::Status::Success) out.push_back(g);
    return out;
}

struct TrainData {
    SceneIndex scenes;
    std::vector<GameRecord> train;
    std::vector<GameRecord> valid;
    Vocabulary vocab;
};

TrainData prepare_train_data(const std::string& scenes_path, const std::string& games_path,
                             const std::string& valid_path, const RunConfig& cfg,
                             bool success_only) {
    TrainData data;
    data.scenes = SceneIndex(load_scenes(scenes_path),
                             FeatureLayout{cfg.n_categories, cfg.n_colors});
    std::vector<GameRecord> games = load_games(games_path);
    if (games.empty()) throw InvalidData("no games in '" + games_path + "'");
    if (!valid_path.empty()) {
        data.train = std::move(games);
        data.valid = load_games(valid_path);
    } else {
        SplitResult split =
            split_games(games, {0.85, 0.15, 0.0}, Rng::derive(cfg.seed, 0x5917));
        data.train = std::move(split.train);
        data.valid = std::move(split.valid);
    }
    data.vocab = build_vocab(data.train, cfg.min_freq);
    if (success_only) {
        data.train = filter_success(data.train, cfg.use_failed_games);
        data.valid = filter_success(data.valid, cfg.use_failed_games);
    }
    if (data.train.empty()) throw InvalidData("no usable training games after filtering");
    return data;
}

void print_report(const char* who, const TrainReport& report) {
    std::printf("%s: %zu epochs, best epoch %d, best valid score %.4f\n", who,
                report.epochs.size(), report.best_epoch, report.best_valid_accuracy);
}

// ---- subcommand bodies -----------------------------------------------------------

struct GenWorldArgs {
    int scenes = 100;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    int objects_min = 4;
    int objects_max = 8;
    std::string gold_out;
    int games_per_scene = 1;
    int max_turns = 5;
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;
};

int run_gen_world(const GenWorldArgs& a) {
    const std::uint64_t master = a.seed_given ? a.seed : env_master_seed();
    WorldSpec spec;
    spec.n_objects_min = a.objects_min;
    spec.n_objects_max = a.objects_max;
    spec.n_categories = a.n_categories;
    spec.n_colors = a.n_colors;

    std::vector<Scene> scenes;
    scenes.reserve(static_cast<std::size_t>(a.scenes));
    char id[32];
    for (int i = 0; i < a.scenes; ++i) {
        Scene s = generate_scene(spec, Rng::derive(master, static_cast<std::uint64_t>(i)));
        std::snprintf(id, sizeof(id), "scene-%06d", i);
        s.scene_id = id;
        scenes.push_back(std::move(s));
    }
    write_scenes(scenes, a.out);
    std::printf("wrote %zu scenes to %s\n", scenes.size(), a.out.c_str());

    if (!a.gold_out.empty()) {
        std::vector<GameRecord> games;
        std::size_t index = 0;
        for (const Scene& s : scenes) {
            for (int g = 0; g < a.games_per_scene; ++g, ++index) {
                Rng trng(Rng::derive(master ^ 0x7a26e7ULL, index));
                const int target = static_cast<int>(trng.index(s.objects.size()));
                GameRecord game = generate_gold_dialog(
                    s, target, Rng::derive(master ^ 0x90a1dULL, index), a.max_turns);
                std::snprintf(id, sizeof(id), "game-%06zu", index);
                game.game_id = id;
                games.push_back(std::move(game));
            }
        }
        write_games(games, a.gold_out);
        std::size_t wins = 0;
        for (const auto& g : games)
            if (g.status == GameRecord::Status::Success) ++wins;
        std::printf("wrote %zu gold games to %s (%.1f%% solved by the script)\n",
                    games.size(), a.gold_out.c_str(),
                    100.0 * static_cast<double>(wins) / static_cast<double>(games.size()));
    }
    return 0;
}

struct TrainArgs {
    std::string scenes, games, valid_games, out, config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool verbose = false;
    bool weak = false;         // oracle only
    std::string guesser_ckpt;  // questioner only
};

int run_train_oracle(const TrainArgs& a) {
    const RunConfig cfg = resolve_config(a.config, a.overrides, a.seed_given, a.seed);
    TrainData data = prepare_train_data(a.scenes, a.games, a.valid_games, cfg, false);

    OracleConfig ocfg;
    ocfg.enc.hidden = cfg.hidden_size;
    ocfg.enc.layers = cfg.layer_count;
    ocfg.enc.feat = FeatureLayout{cfg.n_categories, cfg.n_colors}.dim();
    ocfg.n_categories = cfg.n_categories;
    ocfg.n_colors = cfg.n_colors;
    ocfg.category_embed = cfg.category_embed_size;
    ocfg.mlp_hidden = cfg.oracle_hidden;
    ocfg.max_question_len = cfg.max_question_len;
    ocfg.weak = a.weak;

    OracleModel model = init_oracle(ocfg, data.vocab, cfg.seed);
    const TrainReport report = train_oracle(model, data.train, data.valid, data.scenes,
                                            train_config_of(cfg, a.verbose));
    save_oracle(model, a.out);
    print_report(a.weak ? "weak oracle" : "oracle", report);
    std::printf("saved checkpoint to %s\n", a.out.c_str());
    return 0;
}

int run_train_guesser(const TrainArgs& a) {
    const RunConfig cfg = resolve_config(a.config, a.overrides, a.seed_given, a.seed);
    TrainData data = prepare_train_data(a.scenes, a.games, a.valid_games, cfg, true);

    GuesserConfig gcfg;
    gcfg.enc.hidden = cfg.hidden_size;
    gcfg.enc.layers = cfg.layer_count;
    gcfg.enc.feat = FeatureLayout{cfg.n_categories, cfg.n_colors}.dim();
    gcfg.n_categories = cfg.n_categories;
    gcfg.n_colors = cfg.n_colors;
    gcfg.answer_embed = cfg.answer_embed_size;
    gcfg.head_hidden = cfg.head_hidden;
    gcfg.alpha = cfg.alpha;
    gcfg.variant = cfg.guesser_variant;
    gcfg.answer_blind = cfg.answer_blind;
    gcfg.max_question_len = cfg.max_question_len;

    Vocabulary vocab = data.vocab;
    if (gcfg.variant == GuesserVariant::PreConcatenation)
        vocab = vocab.extended({"yes", "no", "na"});

    GuesserModel model = init_guesser(gcfg, vocab, cfg.seed);
    const TrainReport report = train_guesser(model, data.train, data.valid, data.scenes,
                                             train_config_of(cfg, a.verbose));
    save_guesser(model, a.out);
    print_report("guesser", report);
    std::printf("saved checkpoint to %s\n", a.out.c_str());
    return 0;
}

int run_train_questioner(const TrainArgs& a) {
    const RunConfig cfg = resolve_config(a.config, a.overrides, a.seed_given, a.seed);
    TrainData data = prepare_train_data(a.scenes, a.games, a.valid_games, cfg, true);

    GuesserModel estimator = load_guesser(a.guesser_ckpt);

    QuestionerConfig qcfg;
    qcfg.word_embed = cfg.word_embed_size;
    qcfg.max_question_len = cfg.max_question_len;
    qcfg.max_turns = cfg.max_turns;
    qcfg.freeze_estimator = cfg.freeze_estimator;

    QuestionerModel model = init_questioner(qcfg, std::move(estimator), cfg.seed);
    const TrainReport report = train_questioner(model, data.train, data.valid, data.scenes,
                                                train_config_of(cfg, a.verbose));
    save_questioner(model, a.out);
    print_report("questioner", report);
    std::printf("saved checkpoint to %s\n", a.out.c_str());
    return 0;
}

struct SelfPlayArgs {
    std::string scenes, out;
    std::string oracle = "rule", guesser = "random", questioner = "scripted";
    int games_per_scene = 1;
    int max_turns = 5;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 0;
    bool beliefs = false;
};

int run_selfplay(const SelfPlayArgs& a) {
    AgentWiring wiring{OracleWiring::parse(a.oracle), GuesserWiring::parse(a.guesser),
                       QuestionerWiring::parse(a.questioner)};
    LoadedWiring loaded = LoadedWiring::load(wiring);

    FeatureLayout layout;
    if (loaded.guesser)
        layout = FeatureLayout{loaded.guesser->cfg.n_categories, loaded.guesser->cfg.n_colors};
    else if (loaded.oracle)
        layout = FeatureLayout{loaded.oracle->cfg.n_categories, loaded.oracle->cfg.n_colors};
    SceneIndex scenes(load_scenes(a.scenes), layout);

    GameConfig config;
    config.max_turns = a.max_turns;
    config.master_seed = a.seed_given ? a.seed : env_master_seed();
    config.export_beliefs = a.beliefs;

    const std::vector<GameTask> tasks =
        make_tasks(scenes, config.master_seed, a.games_per_scene);
    const int jobs =
        a.jobs > 0 ? a.jobs
                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::vector<GameRecord> games = self_play(loaded, scenes, tasks, config, jobs);
    write_log(games, a.out);
    std::printf("%zu games, success rate %.1f%% -> %s\n", games.size(), success_rate(games),
                a.out.c_str());
    return 0;
}

struct EvalArgs {
    std::string kind, ckpt, scenes, games, out;
};

int run_eval(const EvalArgs& a) {
    nlohmann::ordered_json report_json;
    if (a.kind == "oracle") {
        OracleModel model = load_oracle(a.ckpt);
        SceneIndex scenes(load_scenes(a.scenes),
                          FeatureLayout{model.cfg.n_categories, model.cfg.n_colors});
        const std::vector<GameRecord> games = load_games(a.games);
        const OracleEvalReport report = eval_oracle(model, games, scenes);
        std::printf("oracle accuracy: %.4f over %zu questions\n", report.overall,
                    report.total);
        nlohmann::ordered_json by_type;
        for (const auto& [type, entry] : report.by_type) {
            std::printf("  %-9s %.4f  (%zu questions)\n", type.c_str(), entry.first,
                        entry.second);
            by_type[type] = {{"accuracy", entry.first}, {"count", entry.second}};
        }
        report_json = {{"overall", report.overall}, {"by_type", by_type}};
    } else if (a.kind == "guesser") {
        GuesserModel model = load_guesser(a.ckpt);
        SceneIndex scenes(load_scenes(a.scenes),
                          FeatureLayout{model.cfg.n_categories, model.cfg.n_colors});
        const std::vector<GameRecord> games = load_games(a.games);
        const double acc = eval_guesser(model, games, scenes);
        std::printf("guesser independent accuracy: %.4f over %zu games\n", acc,
                    games.size());
        report_json = {{"accuracy", acc}, {"games", games.size()}};
    } else {
        throw InvalidSpec("eval: --kind must be oracle or guesser");
    }
    if (!a.out.empty()) write_text(a.out, report_json.dump() + "\n");
    return 0;
}

struct CorruptArgs {
    std::string in, out;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

int run_corrupt(const CorruptArgs& a) {
    const std::vector<GameRecord> games = load_games(a.in);
    const std::vector<GameRecord> corrupted = corrupt_answers(games, {a.ratio, a.seed});
    write_games(corrupted, a.out);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < games.size(); ++i)
        for (std::size_t t = 0; t < games[i].turns.size(); ++t)
            if (games[i].turns[t].second != corrupted[i].turns[t].second) ++changed;
    std::printf("corrupted %zu answers (ratio %.2f) -> %s\n", changed, a.ratio,
                a.out.c_str());
    return 0;
}

struct SweepArgs {
    std::string scenes, games, guessers;
    std::string ratios = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::string seeds = "0,1,2,3,4";
    std::string out;
};

int run_sweep(const SweepArgs& a) {
    std::vector<GuesserModel> models;
    std::vector<std::string> labels;
    for (const auto& spec : split_list(a.guessers)) {
        const GuesserWiring w = GuesserWiring::parse(spec);
        if (w.kind != GuesserWiring::Kind::Trained)
            throw InvalidSpec("sweep-corruption: guesser specs must be trained:<ckpt>");
        models.push_back(load_guesser(w.ckpt_path));
        labels.push_back(spec);
    }
    if (models.empty()) throw InvalidSpec("sweep-corruption: no guessers given");
    std::vector<std::pair<std::string, const GuesserModel*>> guessers;
    for (std::size_t i = 0; i < models.size(); ++i)
        guessers.emplace_back(labels[i], &models[i]);

    std::vector<double> ratios;
    for (const auto& r : split_list(a.ratios)) ratios.push_back(std::stod(r));
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(a.seeds)) seeds.push_back(std::stoull(s));

    const FeatureLayout layout{models[0].cfg.n_categories, models[0].cfg.n_colors};
    SceneIndex scene_index(load_scenes(a.scenes), layout);
    const std::vector<GameRecord> games = load_games(a.games);

    const std::vector<SweepRow> rows =
        corruption_sweep(guessers, games, scene_index, ratios, seeds);
    if (!a.out.empty()) write_text(a.out, sweep_to_csv(rows));

    std::printf("%-36s %6s %9s %8s\n", "guesser", "ratio", "mean", "stdev");
    for (const auto& label : labels) {
        for (double ratio : ratios) {
            double sum = 0.0, sq = 0.0;
            int n = 0;
            for (const auto& row : rows) {
                if (row.guesser != label || row.ratio != ratio) continue;
                sum += row.accuracy;
                sq += row.accuracy * row.accuracy;
                ++n;
            }
            const double mean = sum / n;
            const double var = std::max(0.0, sq / n - mean * mean);
            std::printf("%-36s %6.2f %8.2f%% %8.2f\n", label.c_str(), ratio, mean,
                        std::sqrt(var));
        }
    }
    return 0;
}

struct ConfusionArgs {
    std::string log_a, log_b, out;
};

int run_confusion(const ConfusionArgs& a) {
    const ConfusionMatrix2 m = confusion_matrix(load_games(a.log_a), load_games(a.log_b));
    std::fputs(confusion_to_table(m).c_str(), stdout);
    if (!a.out.empty()) write_text(a.out, confusion_to_json(m) + "\n");
    return 0;
}

struct AblateArgs {
    std::string scenes, oracles, guessers, questioner = "scripted", out;
    int games_per_scene = 1;
    int max_turns = 5;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 0;
};

int run_ablate(const AblateArgs& a) {
    std::vector<OracleWiring> oracles;
    for (const auto& s : split_list(a.oracles)) oracles.push_back(OracleWiring::parse(s));
    std::vector<GuesserWiring> guessers;
    for (const auto& s : split_list(a.guessers)) guessers.push_back(GuesserWiring::parse(s));
    const QuestionerWiring questioner = QuestionerWiring::parse(a.questioner);

    FeatureLayout layout;
    for (const auto& g : guessers) {
        if (g.kind == GuesserWiring::Kind::Trained) {
            const GuesserModel m = load_guesser(g.ckpt_path);
            layout = FeatureLayout{m.cfg.n_categories, m.cfg.n_colors};
            break;
        }
    }
    SceneIndex scene_index(load_scenes(a.scenes), layout);

    GameConfig config;
    config.max_turns = a.max_turns;
    config.master_seed = a.seed_given ? a.seed : env_master_seed();
    const std::vector<GameTask> tasks =
        make_tasks(scene_index, config.master_seed, a.games_per_scene);
    const int jobs =
        a.jobs > 0 ? a.jobs
                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const AblationGrid grid =
        ablation_grid(oracles, guessers, questioner, scene_index, tasks, config, jobs);
    std::printf("%-24s", "oracle \\ guesser");
    for (const auto& g : grid.guesser_labels) std::printf(" %22s", g.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < grid.oracle_labels.size(); ++i) {
        std::printf("%-24s", grid.oracle_labels[i].c_str());
        for (std::size_t j = 0; j < grid.guesser_labels.size(); ++j)
            std::printf(" %21.1f%%", grid.success[i][j]);
        std::printf("\n");
    }
    if (grid.interaction)
        std::printf("interaction delta: %+.1f points\n", *grid.interaction);
    if (!a.out.empty()) write_text(a.out, grid_to_csv(grid));
    return 0;
}

struct PlayArgs {
    std::string role = "questioner";
    std::string scenes;
    int scene_index = 0;
    int target = -1;
    std::string oracle = "rule", guesser = "random", questioner = "scripted";
    int max_turns = 5;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string log;
};

int run_play(const PlayArgs& a) {
    AgentWiring wiring{OracleWiring::parse(a.oracle), GuesserWiring::parse(a.guesser),
                       QuestionerWiring::parse(a.questioner)};
    LoadedWiring loaded = LoadedWiring::load(wiring);
    FeatureLayout layout;
    if (loaded.guesser)
        layout = FeatureLayout{loaded.guesser->cfg.n_categories, loaded.guesser->cfg.n_colors};
    SceneIndex scenes(load_scenes(a.scenes), layout);
    if (a.scene_index < 0 || a.scene_index >= static_cast<int>(scenes.scenes().size()))
        throw InvalidSpec("play: --scene-index out of range");
    const Scene& scene = scenes.scenes()[static_cast<std::size_t>(a.scene_index)];

    GameConfig config;
    config.max_turns = a.max_turns;
    config.master_seed = a.seed_given ? a.seed : env_master_seed();

    GameTask task;
    task.game_id = "interactive-" + scene.scene_id;
    task.scene_id = scene.scene_id;
    if (a.target >= 0) {
        task.target_id = a.target;
    } else {
        Rng rng(Rng::derive(config.master_seed, 0x91a7));
        task.target_id = static_cast<int>(rng.index(scene.objects.size()));
    }
    if (task.target_id >= static_cast<int>(scene.objects.size()))
        throw InvalidSpec("play: --target out of range");

    const GameRecord game =
        interactive_play(a.role, loaded, scenes, task, config, std::cin, std::cout);
    if (!a.log.empty()) {
        std::ofstream out(a.log, std::ios::app);
        if (!out) throw IoError("cannot open '" + a.log + "' for appending");
        out << game_to_json_line(game) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic three-agent guessing-game laboratory"};
    app.require_subcommand(1);

    GenWorldArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-world", "generate scenes and gold dialogs");
    cmd_gen->add_option("--scenes", gen.scenes, "number of scenes")->capture_default_str();
    auto* gen_seed = cmd_gen->add_option("--seed", gen.seed, "master seed");
    cmd_gen->add_option("--out", gen.out, "scene JSONL output")->required();
    cmd_gen->add_option("--objects-min", gen.objects_min)->capture_default_str();
    cmd_gen->add_option("--objects-max", gen.objects_max)->capture_default_str();
    cmd_gen->add_option("--gold-out", gen.gold_out, "also write scripted gold games");
    cmd_gen->add_option("--games-per-scene", gen.games_per_scene)->capture_default_str();
    cmd_gen->add_option("--max-turns", gen.max_turns)->capture_default_str();
    cmd_gen->add_option("--categories", gen.n_categories)->capture_default_str();
    cmd_gen->add_option("--colors", gen.n_colors)->capture_default_str();

    auto add_train_options = [](CLI::App* cmd, TrainArgs& args, const char* what) {
        cmd->add_option("--scenes", args.scenes, "scene JSONL")->required();
        cmd->add_option("--games", args.games,
                        std::string("training games for the ") + what)
            ->required();
        cmd->add_option("--valid-games", args.valid_games,
                        "validation games (default: scene split of --games)");
        cmd->add_option("--out", args.out, "checkpoint output")->required();
        cmd->add_option("--config", args.config, "key = value config file");
        cmd->add_option("--set", args.overrides, "config override key=value (repeatable)");
        cmd->add_flag("--verbose", args.verbose, "per-epoch progress on stderr");
        return cmd->add_option("--seed", args.seed, "training seed");
    };

    TrainArgs oracle_args;
    auto* cmd_oracle = app.add_subcommand("train-oracle", "train the answering agent");
    auto* oracle_seed = add_train_options(cmd_oracle, oracle_args, "oracle");
    cmd_oracle->add_flag("--weak", oracle_args.weak,
                         "weak variant: category-only fusion, no visual block");

    TrainArgs guesser_args;
    auto* cmd_guesser = app.add_subcommand("train-guesser", "train the state estimator");
    auto* guesser_seed = add_train_options(cmd_guesser, guesser_args, "guesser");

    TrainArgs questioner_args;
    auto* cmd_questioner =
        app.add_subcommand("train-questioner", "train the question generator");
    auto* questioner_seed = add_train_options(cmd_questioner, questioner_args, "questioner");
    cmd_questioner
        ->add_option("--guesser", questioner_args.guesser_ckpt,
                     "pretrained guesser checkpoint for the state estimator")
        ->required();

    SelfPlayArgs play_args;
    auto* cmd_selfplay = app.add_subcommand("selfplay", "play full games agent-vs-agent");
    cmd_selfplay->add_option("--scenes", play_args.scenes)->required();
    cmd_selfplay
        ->add_option("--oracle", play_args.oracle,
                     "rule|noisy:<eps>|trained:<ckpt>|weak:<ckpt>")
        ->capture_default_str();
    cmd_selfplay->add_option("--guesser", play_args.guesser, "random|trained:<ckpt>")
        ->capture_default_str();
    cmd_selfplay->add_option("--questioner", play_args.questioner, "scripted|trained:<ckpt>")
        ->capture_default_str();
    cmd_selfplay->add_option("--out", play_args.out, "game log JSONL")->required();
    cmd_selfplay->add_option("--games-per-scene", play_args.games_per_scene)
        ->capture_default_str();
    cmd_selfplay->add_option("--max-turns", play_args.max_turns)->capture_default_str();
    auto* selfplay_seed = cmd_selfplay->add_option("--seed", play_args.seed, "master seed");
    cmd_selfplay->add_option("--jobs", play_args.jobs, "worker threads (default: cores)");
    cmd_selfplay->add_flag("--beliefs", play_args.beliefs, "export belief trajectories");

    EvalArgs eval_args;
    auto* cmd_eval = app.add_subcommand("eval", "independent accuracy of a checkpoint");
    cmd_eval->add_option("--kind", eval_args.kind, "oracle|guesser")->required();
    cmd_eval->add_option("--ckpt", eval_args.ckpt)->required();
    cmd_eval->add_option("--scenes", eval_args.scenes)->required();
    cmd_eval->add_option("--games", eval_args.games)->required();
    cmd_eval->add_option("--out", eval_args.out, "JSON report path");

    CorruptArgs corrupt_args;
    auto* cmd_corrupt = app.add_subcommand("corrupt", "corrupt answers in a game log");
    cmd_corrupt->add_option("--in", corrupt_args.in)->required();
    cmd_corrupt->add_option("--out", corrupt_args.out)->required();
    cmd_corrupt->add_option("--ratio", corrupt_args.ratio, "fraction of answers to corrupt")
        ->required();
    cmd_corrupt->add_option("--seed", corrupt_args.seed)->capture_default_str();

    SweepArgs sweep_args;
    auto* cmd_sweep =
        app.add_subcommand("sweep-corruption", "guesser accuracy under answer corruption");
    cmd_sweep->add_option("--scenes", sweep_args.scenes)->required();
    cmd_sweep->add_option("--games", sweep_args.games, "gold game log")->required();
    cmd_sweep->add_option("--guessers", sweep_args.guessers, "comma list of trained:<ckpt>")
        ->required();
    cmd_sweep->add_option("--ratios", sweep_args.ratios)->capture_default_str();
    cmd_sweep->add_option("--seeds", sweep_args.seeds)->capture_default_str();
    cmd_sweep->add_option("--out", sweep_args.out, "CSV output");

    ConfusionArgs confusion_args;
    auto* cmd_confusion =
        app.add_subcommand("confusion", "joint success matrix of two game logs");
    cmd_confusion->add_option("--log-a", confusion_args.log_a)->required();
    cmd_confusion->add_option("--log-b", confusion_args.log_b)->required();
    cmd_confusion->add_option("--out", confusion_args.out, "JSON output");

    AblateArgs ablate_args;
    auto* cmd_ablate = app.add_subcommand("ablate", "oracle x guesser self-play grid");
    cmd_ablate->add_option("--scenes", ablate_args.scenes)->required();
    cmd_ablate->add_option("--oracles", ablate_args.oracles, "comma list of oracle wirings")
        ->required();
    cmd_ablate
        ->add_option("--guessers", ablate_args.guessers, "comma list of guesser wirings")
        ->required();
    cmd_ablate->add_option("--questioner", ablate_args.questioner)->capture_default_str();
    cmd_ablate->add_option("--games-per-scene", ablate_args.games_per_scene)
        ->capture_default_str();
    cmd_ablate->add_option("--max-turns", ablate_args.max_turns)->capture_default_str();
    auto* ablate_seed =
        cmd_ablate->add_option("--seed", ablate_args.seed, "shared master seed");
    cmd_ablate->add_option("--jobs", ablate_args.jobs);
    cmd_ablate->add_option("--out", ablate_args.out, "CSV output");

    PlayArgs interactive_args;
    auto* cmd_play = app.add_subcommand("play", "interactive game over the terminal");
    cmd_play->add_option("--role", interactive_args.role, "oracle|questioner")
        ->capture_default_str();
    cmd_play->add_option("--scenes", interactive_args.scenes)->required();
    cmd_play->add_option("--scene-index", interactive_args.scene_index)
        ->capture_default_str();
    cmd_play->add_option("--target", interactive_args.target,
                         "target object id (default: seeded random)");
    cmd_play->add_option("--oracle", interactive_args.oracle)->capture_default_str();
    cmd_play->add_option("--guesser", interactive_args.guesser)->capture_default_str();
    cmd_play->add_option("--questioner", interactive_args.questioner)->capture_default_str();
    cmd_play->add_option("--max-turns", interactive_args.max_turns)->capture_default_str();
    auto* play_seed = cmd_play->add_option("--seed", interactive_args.seed);
    cmd_play->add_option("--log", interactive_args.log, "append the game to this JSONL log");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cmd_gen) {
            gen.seed_given = gen_seed->count() > 0;
            return run_gen_world(gen);
        }
        if (*cmd_oracle) {
            oracle_args.seed_given = oracle_seed->count() > 0;
            return run_train_oracle(oracle_args);
        }
        if (*cmd_guesser) {
            guesser_args.seed_given = guesser_seed->count() > 0;
            return run_train_guesser(guesser_args);
        }
        if (*cmd_questioner) {
            questioner_args.seed_given = questioner_seed->count() > 0;
            return run_train_questioner(questioner_args);
        }
        if (*cmd_selfplay) {
            play_args.seed_given = selfplay_seed->count() > 0;
            return run_selfplay(play_args);
        }
        if (*cmd_eval) return run_eval(eval_args);
        if (*cmd_corrupt) return run_corrupt(corrupt_args);
        if (*cmd_sweep) return run_sweep(sweep_args);
        if (*cmd_confusion) return run_confusion(confusion_args);
        if (*cmd_ablate) {
            ablate_args.seed_given = ablate_seed->count() > 0;
            return run_ablate(ablate_args);
        }
        if (*cmd_play) {
            interactive_args.seed_given = play_seed->count() > 0;
            return run_play(interactive_args);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
