#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwlab/errors.hpp"

namespace gwlab {

/// Closed three-class answer set.
enum class AnswerClass : int { Yes = 0, No = 1, NA = 2 };

std::string to_string(AnswerClass a);
/// Parses "yes" / "no" / "n/a" case-insensitively; throws ParseError otherwise.
AnswerClass answer_from_string(std::string_view s);

/// One full game: dialog turns plus the final guess. The single on-disk
/// JSONL schema shared by training data, self-play logs and analysis inputs.
struct GameRecord {
    enum class Status { Success, Failure, Incomplete };

    std::string game_id;
    std::string scene_id;
    int target_id = -1;
    std::vector<std::pair<std::string, AnswerClass>> turns;
    std::optional<int> guess;
    Status status = Status::Incomplete;
    /// Per-turn belief distributions, exported on demand for visualizations.
    std::optional<std::vector<std::vector<double>>> beliefs;
};

std::string to_string(GameRecord::Status s);
GameRecord::Status status_from_string(std::string_view s);

}  // namespace gwlab
