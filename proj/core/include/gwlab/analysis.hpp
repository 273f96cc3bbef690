#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwlab/engine.hpp"

namespace gwlab {

// ---- basic rates ------------------------------------------------------------------

/// 100 * successes / games. Throws EmptyInput on an empty log.
double success_rate(const std::vector<GameRecord>& logs);

/// Percentage of games containing at least one repeated question; repeats are
/// exact string matches after lowercase/trim/'?'-strip normalization.
double repeated_question_rate(const std::vector<GameRecord>& logs);

/// Percentage per question type over {object, color, size, location, other}.
std::map<std::string, double> question_type_distribution(const std::vector<GameRecord>& logs);

// ---- self-BLEU ---------------------------------------------------------------------

/// Self-BLEU per n-gram order in 2..max_n: each question scores as the
/// candidate against all others (modified n-gram precisions for 1..n,
/// geometric mean, brevity penalty against the closest reference length with
/// ties to the shorter); scores average over candidates. A singleton set
/// scores 0 by convention.
std::map<int, double> self_bleu(const std::vector<std::string>& questions, int max_n);

// ---- answer corruption ----------------------------------------------------------------

struct CorruptionSpec {
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

/// Corrupts exactly round(ratio * total_answers) answer positions, chosen
/// uniformly without replacement: Yes and No flip, NA becomes a seeded coin
/// between Yes and No. Everything else is untouched.
std::vector<GameRecord> corrupt_answers(const std::vector<GameRecord>& games,
                                        const CorruptionSpec& spec);

struct SweepRow {
    std::string guesser;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;  // percent
};

/// Re-runs each guesser over each corrupted copy of the games.
std::vector<SweepRow> corruption_sweep(
    const std::vector<std::pair<std::string, const GuesserModel*>>& guessers,
    const std::vector<GameRecord>& games, const SceneIndex& scenes,
    const std::vector<double>& ratios, const std::vector<std::uint64_t>& seeds);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// ---- confusion matrix -----------------------------------------------------------------

/// Joint success counts of two logs over the same games. Marginals are always
/// recomputed from the cells.
struct ConfusionMatrix2 {
    long long aa = 0;  // A correct, B correct
    long long ab = 0;  // A correct, B wrong
    long long ba = 0;  // A wrong,  B correct
    long long bb = 0;  // A wrong,  B wrong

    long long total() const { return aa + ab + ba + bb; }
    std::array<double, 2> row_marginals_pct() const;  // A correct%, A wrong%
    std::array<double, 2> col_marginals_pct() const;  // B correct%, B wrong%
};

/// Joins two logs by game_id; both must cover the same
/// (game_id, scene_id, target_id) set or JoinError lists the offenders.
ConfusionMatrix2 confusion_matrix(const std::vector<GameRecord>& logs_a,
                                  const std::vector<GameRecord>& logs_b);

std::string confusion_to_json(const ConfusionMatrix2& m);
std::string confusion_to_table(const ConfusionMatrix2& m);

// ---- ablation grid ------------------------------------------------------------------------

struct AblationGrid {
    std::vector<std::string> oracle_labels;
    std::vector<std::string> guesser_labels;
    std::vector<std::vector<double>> success;  // percent, [oracle][guesser]
    std::optional<double> interaction;         // 2x2 grids only
};

/// (both - baseline) - max(single upgrades - baseline); positive means the
/// upgrades only pay off together.
double interaction_delta(double baseline, double oracle_up, double guesser_up, double both);

/// Runs self_play per cell over identical tasks and seed streams.
AblationGrid ablation_grid(const std::vector<OracleWiring>& oracles,
                           const std::vector<GuesserWiring>& guessers,
                           const QuestionerWiring& questioner, const SceneIndex& scenes,
                           const std::vector<GameTask>& tasks, const GameConfig& config,
                           int jobs = 1);

std::string grid_to_csv(const AblationGrid& grid);

}  // namespace gwlab
