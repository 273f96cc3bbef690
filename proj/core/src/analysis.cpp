#include "gwlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gwlab {

namespace {

std::string normalize_question(const std::string& q) {
    std::string s;
    for (char ch : q) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    while (!s.empty() && (s.back() == '?' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t a = s.find_first_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a);
}

}  // namespace

double success_rate(const std::vector<GameRecord>& logs) {
    if (logs.empty()) throw EmptyInput("success_rate: no games");
    std::size_t wins = 0;
    for (const auto& g : logs)
        if (g.status == GameRecord::Status::Success) ++wins;
    return 100.0 * static_cast<double>(wins) / static_cast<double>(logs.size());
}

double repeated_question_rate(const std::vector<GameRecord>& logs) {
    if (logs.empty()) return 0.0;
    std::size_t flagged = 0;
    for (const auto& g : logs) {
        std::set<std::string> seen;
        for (const auto& [q, a] : g.turns) {
            if (!seen.insert(normalize_question(q)).second) {
                ++flagged;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(flagged) / static_cast<double>(logs.size());
}

std::map<std::string, double> question_type_distribution(const std::vector<GameRecord>& logs) {
    static const char* kTypes[] = {"object", "color", "size", "location", "other"};
    std::map<std::string, std::size_t> counts;
    for (const char* t : kTypes) counts[t] = 0;
    std::size_t total = 0;
    for (const auto& g : logs) {
        for (const auto& [q, a] : g.turns) {
            switch (parse_question(q).kind) {
                case QuestionSemantics::Kind::Category: ++counts["object"]; break;
                case QuestionSemantics::Kind::Color: ++counts["color"]; break;
                case QuestionSemantics::Kind::SizeClass: ++counts["size"]; break;
                case QuestionSemantics::Kind::LocationHalf: ++counts["location"]; break;
                default: ++counts["other"]; break;
            }
            ++total;
        }
    }
    std::map<std::string, double> out;
    for (const char* t : kTypes)
        out[t] = total == 0 ? 0.0
                            : 100.0 * static_cast<double>(counts[t]) / static_cast<double>(total);
    return out;
}

// ---- self-BLEU -----------------------------------------------------------------------

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams_of(const std::vector<std::string>& words, int n) {
    NgramCounts counts;
    if (static_cast<int>(words.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i)
        ++counts[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                          words.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

double bleu_against(const std::vector<std::string>& cand,
                    const std::vector<std::vector<std::string>>& refs, int max_n) {
    if (cand.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const NgramCounts cand_counts = ngrams_of(cand, n);
        std::size_t total = 0;
        for (const auto& [ng, c] : cand_counts) total += c;
        if (total == 0) return 0.0;  // candidate shorter than n

        NgramCounts max_ref;
        for (const auto& ref : refs)
            for (const auto& [ng, c] : ngrams_of(ref, n)) {
                auto& m = max_ref[ng];
                m = std::max(m, c);
            }
        std::size_t clipped = 0;
        for (const auto& [ng, c] : cand_counts) {
            auto it = max_ref.find(ng);
            if (it != max_ref.end()) clipped += std::min(c, it->second);
        }
        if (clipped == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    const double geo = std::exp(log_sum / static_cast<double>(max_n));

    // Brevity penalty against the closest reference length, ties to shorter.
    const std::size_t c = cand.size();
    std::size_t r = refs.front().size();
    for (const auto& ref : refs) {
        const std::size_t len = ref.size();
        const auto dist = [&](std::size_t l) {
            return l > c ? l - c : c - l;
        };
        if (dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
    }
    const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * geo;
}

}  // namespace

std::map<int, double> self_bleu(const std::vector<std::string>& questions, int max_n) {
    if (questions.empty()) throw EmptyInput("self_bleu: no questions");
    if (max_n < 2) throw InvalidSpec("self_bleu: max_n >= 2");
    std::map<int, double> out;
    if (questions.size() == 1) {
        for (int n = 2; n <= max_n; ++n) out[n] = 0.0;
        return out;
    }
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(questions.size());
    for (const auto& q : questions) tokenized.push_back(tokenize_question(q));

    for (int n = 2; n <= max_n; ++n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < tokenized.size(); ++i) {
            std::vector<std::vector<std::string>> refs;
            refs.reserve(tokenized.size() - 1);
            for (std::size_t j = 0; j < tokenized.size(); ++j)
                if (j != i) refs.push_back(tokenized[j]);
            sum += bleu_against(tokenized[i], refs, n);
        }
        out[n] = sum / static_cast<double>(tokenized.size());
    }
    return out;
}

// ---- corruption -----------------------------------------------------------------------

std::vector<GameRecord> corrupt_answers(const std::vector<GameRecord>& games,
                                        const CorruptionSpec& spec) {
    if (spec.ratio < 0.0 || spec.ratio > 1.0)
        throw InvalidSpec("corrupt_answers: ratio out of [0,1]");
    std::size_t total = 0;
    for (const auto& g : games) total += g.turns.size();
    const std::size_t k =
        static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(total)));

    Rng rng(spec.seed);
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.index(total - i);
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());

    std::vector<GameRecord> out = games;
    std::size_t cursor = 0;  // next chosen index to apply
    std::size_t position = 0;
    for (auto& g : out) {
        for (auto& [q, a] : g.turns) {
            if (cursor < chosen.size() && chosen[cursor] == position) {
                ++cursor;
                switch (a) {
                    case AnswerClass::Yes: a = AnswerClass::No; break;
                    case AnswerClass::No: a = AnswerClass::Yes; break;
                    default: a = rng.coin(0.5) ? AnswerClass::Yes : AnswerClass::No; break;
                }
            }
            ++position;
        }
        // Corruption can silently flip a recorded answer without changing the
        // outcome fields; guess/status stay as logged.
    }
    return out;
}

std::vector<SweepRow> corruption_sweep(
    const std::vector<std::pair<std::string, const GuesserModel*>>& guessers,
    const std::vector<GameRecord>& games, const SceneIndex& scenes,
    const std::vector<double>& ratios, const std::vector<std::uint64_t>& seeds) {
    std::vector<SweepRow> rows;
    for (double ratio : ratios) {
        for (std::uint64_t seed : seeds) {
            const std::vector<GameRecord> corrupted = corrupt_answers(games, {ratio, seed});
            for (const auto& [label, model] : guessers) {
                SweepRow row;
                row.guesser = label;
                row.ratio = ratio;
                row.seed = seed;
                row.accuracy = 100.0 * eval_guesser(*model, corrupted, scenes);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "guesser,ratio,seed,accuracy\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.2f,%llu,%.4f", r.ratio,
                      static_cast<unsigned long long>(r.seed), r.accuracy);
        out << r.guesser << ',' << buf << '\n';
    }
    return out.str();
}

// ---- confusion matrix ---------------------------------------------------------------------

std::array<double, 2> ConfusionMatrix2::row_marginals_pct() const {
    const double t = static_cast<double>(total());
    return {100.0 * static_cast<double>(aa + ab) / t, 100.0 * static_cast<double>(ba + bb) / t};
}

std::array<double, 2> ConfusionMatrix2::col_marginals_pct() const {
    const double t = static_cast<double>(total());
    return {100.0 * static_cast<double>(aa + ba) / t, 100.0 * static_cast<double>(ab + bb) / t};
}

ConfusionMatrix2 confusion_matrix(const std::vector<GameRecord>& logs_a,
                                  const std::vector<GameRecord>& logs_b) {
    using Key = std::tuple<std::string, std::string, int>;
    std::map<Key, bool> a_result;
    for (const auto& g : logs_a)
        a_result[{g.game_id, g.scene_id, g.target_id}] = g.status == GameRecord::Status::Success;

    ConfusionMatrix2 m;
    std::vector<std::string> missing;
    std::set<Key> seen_b;
    for (const auto& g : logs_b) {
        const Key key{g.game_id, g.scene_id, g.target_id};
        seen_b.insert(key);
        auto it = a_result.find(key);
        if (it == a_result.end()) {
            missing.push_back("B-only " + g.game_id);
            continue;
        }
        const bool a_ok = it->second;
        const bool b_ok = g.status == GameRecord::Status::Success;
        if (a_ok && b_ok) ++m.aa;
        else if (a_ok) ++m.ab;
        else if (b_ok) ++m.ba;
        else ++m.bb;
    }
    for (const auto& [key, ok] : a_result)
        if (!seen_b.count(key)) missing.push_back("A-only " + std::get<0>(key));
    if (!missing.empty()) {
        std::string msg = "confusion_matrix: logs cover different games:";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += " (+" + std::to_string(missing.size() - 10) + " more)";
        throw JoinError(msg);
    }
    if (m.total() == 0) throw EmptyInput("confusion_matrix: no joined games");
    return m;
}

std::string confusion_to_json(const ConfusionMatrix2& m) {
    const auto row = m.row_marginals_pct();
    const auto col = m.col_marginals_pct();
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "{\"cells\":{\"aa\":%lld,\"ab\":%lld,\"ba\":%lld,\"bb\":%lld},"
                  "\"row_marginals_pct\":[%.1f,%.1f],\"col_marginals_pct\":[%.1f,%.1f],"
                  "\"total\":%lld}",
                  m.aa, m.ab, m.ba, m.bb, row[0], row[1], col[0], col[1], m.total());
    return buf;
}

std::string confusion_to_table(const ConfusionMatrix2& m) {
    const auto row = m.row_marginals_pct();
    const auto col = m.col_marginals_pct();
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "            B correct   B wrong     total\n"
                  "A correct   %9lld  %8lld  %7.1f%%\n"
                  "A wrong     %9lld  %8lld  %7.1f%%\n"
                  "total       %8.1f%%  %7.1f%%\n",
                  m.aa, m.ab, row[0], m.ba, m.bb, row[1], col[0], col[1]);
    return buf;
}

// ---- ablation grid ---------------------------------------------------------------------------

double interaction_delta(double baseline, double oracle_up, double guesser_up, double both) {
    return (both - baseline) - std::max(oracle_up - baseline, guesser_up - baseline);
}

AblationGrid ablation_grid(const std::vector<OracleWiring>& oracles,
                           const std::vector<GuesserWiring>& guessers,
                           const QuestionerWiring& questioner, const SceneIndex& scenes,
                           const std::vector<GameTask>& tasks, const GameConfig& config,
                           int jobs) {
    if (oracles.empty() || guessers.empty())
        throw InvalidSpec("ablation_grid: need at least one oracle and one guesser");
    AblationGrid grid;
    for (const auto& o : oracles) grid.oracle_labels.push_back(o.label());
    for (const auto& g : guessers) grid.guesser_labels.push_back(g.label());
    grid.success.assign(oracles.size(), std::vector<double>(guessers.size(), 0.0));
    for (std::size_t i = 0; i < oracles.size(); ++i) {
        for (std::size_t j = 0; j < guessers.size(); ++j) {
            AgentWiring wiring{oracles[i], guessers[j], questioner};
            LoadedWiring loaded = LoadedWiring::load(wiring);
            const std::vector<GameRecord> games = self_play(loaded, scenes, tasks, config, jobs);
            grid.success[i][j] = success_rate(games);
        }
    }
    if (oracles.size() == 2 && guessers.size() == 2)
        grid.interaction = interaction_delta(grid.success[0][0], grid.success[1][0],
                                             grid.success[0][1], grid.success[1][1]);
    return grid;
}

std::string grid_to_csv(const AblationGrid& grid) {
    std::ostringstream out;
    out << "oracle,guesser,success_rate\n";
    char buf[32];
    for (std::size_t i = 0; i < grid.oracle_labels.size(); ++i) {
        for (std::size_t j = 0; j < grid.guesser_labels.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.4f", grid.success[i][j]);
            out << grid.oracle_labels[i] << ',' << grid.guesser_labels[j] << ',' << buf << '\n';
        }
    }
    return out.str();
}

}  // namespace gwlab
