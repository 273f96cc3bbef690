#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gwlab/game.hpp"

namespace gwlab {

// ---- vocabulary -----------------------------------------------------------------

/// Token table frozen after build. Specials occupy indices 0-4.
class Vocabulary {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kSos = 1;
    static constexpr std::size_t kEos = 2;
    static constexpr std::size_t kUnk = 3;
    static constexpr std::size_t kCls = 4;
    static constexpr std::size_t kNumSpecials = 5;

    Vocabulary();
    /// Builds from the full token list including the five specials up front.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(std::size_t id) const { return tokens_[id]; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Index of a token; [UNK] when absent.
    std::size_t id(std::string_view token) const;
    bool contains(std::string_view token) const;

    /// Copy with extra tokens appended at the tail; existing ids are stable.
    Vocabulary extended(const std::vector<std::string>& extra) const;

    bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---- tokenization -----------------------------------------------------------------

/// Lowercase, strip the terminal '?', split on whitespace.
std::vector<std::string> tokenize_question(std::string_view text);

/// Token ids with [CLS] prepended, truncated to max_len total entries.
struct QuestionTokens {
    std::vector<std::size_t> ids;
    bool truncated = false;
};

QuestionTokens to_question_tokens(std::string_view question, const Vocabulary& vocab,
                                  std::size_t max_len);

// ---- game log ingestion --------------------------------------------------------------

/// Reads a JSONL game log preserving order. Malformed lines raise ParseError
/// with the 1-based line number; invariant violations raise SchemaError.
std::vector<GameRecord> load_games(const std::string& path);
void write_games(const std::vector<GameRecord>& games, const std::string& path);

std::string game_to_json_line(const GameRecord& game);
GameRecord game_from_json_line(const std::string& line, std::size_t line_no);

/// Whitespace vocabulary over all questions: specials, then tokens ordered by
/// (frequency desc, lexicographic), keeping those seen >= min_freq times.
Vocabulary build_vocab(const std::vector<GameRecord>& games, std::size_t min_freq);

// ---- splits ------------------------------------------------------------------------------

struct SplitResult {
    std::vector<GameRecord> train;
    std::vector<GameRecord> valid;
    std::vector<GameRecord> test;
};

/// Scene-disjoint shuffle-split; sizes within one scene of the exact ratios.
SplitResult split_games(const std::vector<GameRecord>& games,
                        std::array<double, 3> ratios, std::uint64_t seed);

}  // namespace gwlab
