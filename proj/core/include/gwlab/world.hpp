#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gwlab/game.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

// ---- lexicons ----------------------------------------------------------------

inline constexpr int kMaxCategories = 10;
inline constexpr int kMaxColors = 8;
inline constexpr int kNumSizes = 3;

const std::array<std::string, kMaxCategories>& category_names();
const std::array<std::string, kMaxColors>& color_names();
const std::array<std::string, kNumSizes>& size_names();

int category_index(std::string_view name);  // -1 when unknown
int color_index(std::string_view name);
int size_index(std::string_view name);

// ---- scene -------------------------------------------------------------------

struct SceneObject {
    int id = 0;
    int category = 0;
    int color = 0;
    int size_class = 0;
    std::array<double, 4> bbox{};  // x_min, y_min, x_max, y_max in [0,1]

    double center_x() const { return 0.5 * (bbox[0] + bbox[2]); }
    double center_y() const { return 0.5 * (bbox[1] + bbox[3]); }
};

/// Synthetic image: normalized 1x1 canvas holding >=2 objects with ids 0..N-1.
struct Scene {
    std::string scene_id;
    std::vector<SceneObject> objects;
};

struct WorldSpec {
    int n_objects_min = 4;
    int n_objects_max = 8;
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;
    /// Chance that one category is duplicated across two objects; 1.0 keeps
    /// every scene from being solvable by the category question alone.
    double duplicate_category_prob = 1.0;
};

Scene generate_scene(const WorldSpec& spec, std::uint64_t seed);

/// One line per object: "id category color size at (cx, cy)", ordered by id.
std::string render_scene_text(const Scene& scene);

void write_scenes(const std::vector<Scene>& scenes, const std::string& path);
std::vector<Scene> load_scenes(const std::string& path);

// ---- question grammar ----------------------------------------------------------

enum class Side : int { Left = 0, Right = 1, Top = 2, Bottom = 3 };

struct QuestionSemantics {
    enum class Kind { Category, Color, SizeClass, LocationHalf, Unparseable };
    Kind kind = Kind::Unparseable;
    int value = -1;  // category/color/size index or Side cast to int

    static QuestionSemantics category(int c) { return {Kind::Category, c}; }
    static QuestionSemantics color(int c) { return {Kind::Color, c}; }
    static QuestionSemantics size(int s) { return {Kind::SizeClass, s}; }
    static QuestionSemantics location(Side s) {
        return {Kind::LocationHalf, static_cast<int>(s)};
    }
    static QuestionSemantics unparseable() { return {}; }

    bool operator==(const QuestionSemantics&) const = default;
};

/// Template matcher for the toy grammar. The compound form
/// "is it the <category> on the <left|right>" reduces to its location half;
/// the category qualifier is contextual by the time the script uses it.
QuestionSemantics parse_question(std::string_view text);

/// Ground-truth answer function. Unparseable questions answer NA; location
/// uses the bbox center against the 0.5 half-plane with ties answering No.
AnswerClass rule_answer(const Scene& scene, int target_id, const QuestionSemantics& sem);

std::string make_category_question(int category);
std::string make_color_question(int color);
std::string make_size_question(int size_class);
std::string make_location_question(Side side);
std::string make_compound_question(int category, Side side);

// ---- scripted questioner ---------------------------------------------------------

/// Candidate-elimination policy over the grammar: repeatedly asks the
/// best-split attribute question (category first, then color, size,
/// location) for the surviving candidate set. Shared by the gold-dialog
/// generator and the engine's scripted agent.
class ScriptedQuestionPolicy {
public:
    ScriptedQuestionPolicy(const Scene& scene, std::uint64_t seed);

    /// Next question, or nullopt when no grammar question can split the
    /// remaining candidates.
    std::optional<std::pair<std::string, QuestionSemantics>> next_question();

    /// Filters candidates to those consistent with the answer. An answer that
    /// would empty the set (possible under a noisy oracle) is ignored.
    void observe(const QuestionSemantics& sem, AnswerClass answer);

    const std::vector<int>& candidates() const { return candidates_; }
    int best_guess() const { return candidates_.front(); }

private:
    const Scene* scene_;
    std::vector<int> candidates_;
    Rng rng_;
};

/// Scripted self-dialog against rule_answer; stands in for human games.
GameRecord generate_gold_dialog(const Scene& scene, int target_id, std::uint64_t seed,
                                int max_turns);

}  // namespace gwlab
