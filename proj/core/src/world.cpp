#include "gwlab/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gwlab {

namespace {

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

int side_index(std::string_view w) {
    if (w == "left") return static_cast<int>(Side::Left);
    if (w == "right") return static_cast<int>(Side::Right);
    if (w == "top") return static_cast<int>(Side::Top);
    if (w == "bottom") return static_cast<int>(Side::Bottom);
    return -1;
}

const char* side_name(Side s) {
    switch (s) {
        case Side::Left: return "left";
        case Side::Right: return "right";
        case Side::Top: return "top";
        default: return "bottom";
    }
}

}  // namespace

std::string to_string(AnswerClass a) {
    switch (a) {
        case AnswerClass::Yes: return "yes";
        case AnswerClass::No: return "no";
        default: return "n/a";
    }
}

AnswerClass answer_from_string(std::string_view s) {
    std::string low;
    for (char ch : s) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (low == "yes") return AnswerClass::Yes;
    if (low == "no") return AnswerClass::No;
    if (low == "n/a") return AnswerClass::NA;
    throw ParseError("unknown answer class '" + std::string(s) + "'");
}

std::string to_string(GameRecord::Status s) {
    switch (s) {
        case GameRecord::Status::Success: return "success";
        case GameRecord::Status::Failure: return "failure";
        default: return "incomplete";
    }
}

GameRecord::Status status_from_string(std::string_view s) {
    if (s == "success") return GameRecord::Status::Success;
    if (s == "failure") return GameRecord::Status::Failure;
    if (s == "incomplete") return GameRecord::Status::Incomplete;
    throw ParseError("unknown status '" + std::string(s) + "'");
}

const std::array<std::string, kMaxCategories>& category_names() {
    static const std::array<std::string, kMaxCategories> names = {
        "person", "dog", "cat", "car", "bus", "chair", "table", "bottle", "plant", "ball"};
    return names;
}

const std::array<std::string, kMaxColors>& color_names() {
    static const std::array<std::string, kMaxColors> names = {
        "red", "blue", "green", "yellow", "black", "white", "orange", "purple"};
    return names;
}

const std::array<std::string, kNumSizes>& size_names() {
    static const std::array<std::string, kNumSizes> names = {"small", "medium", "large"};
    return names;
}

namespace {
template <typename Arr>
int index_in(const Arr& arr, std::string_view name) {
    for (std::size_t i = 0; i < arr.size(); ++i)
        if (arr[i] == name) return static_cast<int>(i);
    return -1;
}
}  // namespace

int category_index(std::string_view name) { return index_in(category_names(), name); }
int color_index(std::string_view name) { return index_in(color_names(), name); }
int size_index(std::string_view name) { return index_in(size_names(), name); }

// ---- scene generation -----------------------------------------------------------

Scene generate_scene(const WorldSpec& spec, std::uint64_t seed) {
    if (spec.n_objects_min < 2 || spec.n_objects_max > 20 ||
        spec.n_objects_min > spec.n_objects_max)
        throw InvalidSpec("generate_scene: need 2 <= n_objects_min <= n_objects_max <= 20");
    if (spec.n_categories < 1 || spec.n_categories > kMaxCategories ||
        spec.n_colors < 1 || spec.n_colors > kMaxColors)
        throw InvalidSpec("generate_scene: lexicon sizes out of range");
    if (spec.duplicate_category_prob < 0.0 || spec.duplicate_category_prob > 1.0)
        throw InvalidSpec("generate_scene: duplicate_category_prob out of [0,1]");

    Rng rng(seed);
    const int n = spec.n_objects_min +
                  static_cast<int>(rng.index(static_cast<std::size_t>(
                      spec.n_objects_max - spec.n_objects_min + 1)));

    Scene scene;
    scene.scene_id = "scene-" + std::to_string(seed);
    scene.objects.reserve(static_cast<std::size_t>(n));
    constexpr double kMinSide = 0.05;
    constexpr double kMaxSide = 0.40;
    for (int i = 0; i < n; ++i) {
        SceneObject obj;
        obj.id = i;
        obj.category = static_cast<int>(rng.index(static_cast<std::size_t>(spec.n_categories)));
        obj.color = static_cast<int>(rng.index(static_cast<std::size_t>(spec.n_colors)));
        obj.size_class = static_cast<int>(rng.index(kNumSizes));
        const double w = rng.uniform(kMinSide, kMaxSide);
        const double h = rng.uniform(kMinSide, kMaxSide);
        const double x = rng.uniform(0.0, 1.0 - w);
        const double y = rng.uniform(0.0, 1.0 - h);
        obj.bbox = {x, y, x + w, y + h};
        scene.objects.push_back(obj);
    }

    if (n >= 2 && rng.coin(spec.duplicate_category_prob)) {
        const std::size_t a = rng.index(static_cast<std::size_t>(n));
        std::size_t b = rng.index(static_cast<std::size_t>(n - 1));
        if (b >= a) ++b;
        scene.objects[b].category = scene.objects[a].category;
    }
    return scene;
}

std::string render_scene_text(const Scene& scene) {
    std::string out;
    char line[128];
    for (const auto& obj : scene.objects) {
        std::snprintf(line, sizeof(line), "%d %s %s %s at (%.2f, %.2f)\n", obj.id,
                      category_names()[static_cast<std::size_t>(obj.category)].c_str(),
                      color_names()[static_cast<std::size_t>(obj.color)].c_str(),
                      size_names()[static_cast<std::size_t>(obj.size_class)].c_str(),
                      obj.center_x(), obj.center_y());
        out += line;
    }
    return out;
}

// ---- grammar ---------------------------------------------------------------------

QuestionSemantics parse_question(std::string_view text) {
    std::string stripped(text);
    while (!stripped.empty() &&
           (stripped.back() == '?' || stripped.back() == ' ' || stripped.back() == '\n'))
        stripped.pop_back();
    const std::vector<std::string> w = split_words(stripped);

    if (w.size() < 3 || w[0] != "is" || w[1] != "it") return QuestionSemantics::unparseable();

    // "is it a/an <category>"
    if (w.size() == 4 && (w[2] == "a" || w[2] == "an")) {
        const int c = category_index(w[3]);
        if (c >= 0) return QuestionSemantics::category(c);
        return QuestionSemantics::unparseable();
    }
    // "is it <color>" / "is it <size_class>"
    if (w.size() == 3) {
        if (const int c = color_index(w[2]); c >= 0) return QuestionSemantics::color(c);
        if (const int s = size_index(w[2]); s >= 0) return QuestionSemantics::size(s);
        return QuestionSemantics::unparseable();
    }
    // "is it on the <left|right|top|bottom>"
    if (w.size() == 5 && w[2] == "on" && w[3] == "the") {
        if (const int s = side_index(w[4]); s >= 0)
            return QuestionSemantics::location(static_cast<Side>(s));
        return QuestionSemantics::unparseable();
    }
    // "is it the <category> on the <left|right>"
    if (w.size() == 7 && w[2] == "the" && w[4] == "on" && w[5] == "the") {
        const int c = category_index(w[3]);
        const int s = side_index(w[6]);
        if (c >= 0 && (s == static_cast<int>(Side::Left) || s == static_cast<int>(Side::Right)))
            return QuestionSemantics::location(static_cast<Side>(s));
        return QuestionSemantics::unparseable();
    }
    return QuestionSemantics::unparseable();
}

AnswerClass rule_answer(const Scene& scene, int target_id, const QuestionSemantics& sem) {
    if (target_id < 0 || target_id >= static_cast<int>(scene.objects.size()))
        throw InvalidTarget("rule_answer: target " + std::to_string(target_id) +
                            " not in scene " + scene.scene_id);
    const SceneObject& t = scene.objects[static_cast<std::size_t>(target_id)];
    switch (sem.kind) {
        case QuestionSemantics::Kind::Category:
            return t.category == sem.value ? AnswerClass::Yes : AnswerClass::No;
        case QuestionSemantics::Kind::Color:
            return t.color == sem.value ? AnswerClass::Yes : AnswerClass::No;
        case QuestionSemantics::Kind::SizeClass:
            return t.size_class == sem.value ? AnswerClass::Yes : AnswerClass::No;
        case QuestionSemantics::Kind::LocationHalf: {
            // Ties (center exactly on 0.5) answer No.
            switch (static_cast<Side>(sem.value)) {
                case Side::Left: return t.center_x() < 0.5 ? AnswerClass::Yes : AnswerClass::No;
                case Side::Right: return t.center_x() > 0.5 ? AnswerClass::Yes : AnswerClass::No;
                case Side::Top: return t.center_y() < 0.5 ? AnswerClass::Yes : AnswerClass::No;
                default: return t.center_y() > 0.5 ? AnswerClass::Yes : AnswerClass::No;
            }
        }
        default:
            return AnswerClass::NA;
    }
}

std::string make_category_question(int category) {
    return "is it a " + category_names()[static_cast<std::size_t>(category)] + "?";
}
std::string make_color_question(int color) {
    return "is it " + color_names()[static_cast<std::size_t>(color)] + "?";
}
std::string make_size_question(int size_class) {
    return "is it " + size_names()[static_cast<std::size_t>(size_class)] + "?";
}
std::string make_location_question(Side side) {
    return std::string("is it on the ") + side_name(side) + "?";
}
std::string make_compound_question(int category, Side side) {
    return "is it the " + category_names()[static_cast<std::size_t>(category)] + " on the " +
           side_name(side) + "?";
}

// ---- scripted policy ----------------------------------------------------------------

ScriptedQuestionPolicy::ScriptedQuestionPolicy(const Scene& scene, std::uint64_t seed)
    : scene_(&scene), rng_(seed) {
    if (scene.objects.size() < 2)
        throw InvalidScene("ScriptedQuestionPolicy: scene needs >=2 objects");
    candidates_.resize(scene.objects.size());
    for (std::size_t i = 0; i < candidates_.size(); ++i) candidates_[i] = static_cast<int>(i);
}

std::optional<std::pair<std::string, QuestionSemantics>>
ScriptedQuestionPolicy::next_question() {
    const std::size_t n = candidates_.size();
    if (n < 2) return std::nullopt;

    // Best-split value of one attribute kind; kinds tried in fixed order.
    auto best_value = [&](auto&& value_of, int n_values) -> std::optional<int> {
        int best = -1;
        int best_dist = std::numeric_limits<int>::max();
        for (int v = 0; v < n_values; ++v) {
            int matches = 0;
            for (int c : candidates_)
                if (value_of(scene_->objects[static_cast<std::size_t>(c)]) == v) ++matches;
            if (matches == 0 || matches == static_cast<int>(n)) continue;
            const int dist = std::abs(2 * matches - static_cast<int>(n));
            if (dist < best_dist) best_dist = dist, best = v;
        }
        if (best < 0) return std::nullopt;
        return best;
    };

    if (auto c = best_value([](const SceneObject& o) { return o.category; }, kMaxCategories))
        return std::make_pair(make_category_question(*c), QuestionSemantics::category(*c));
    if (auto c = best_value([](const SceneObject& o) { return o.color; }, kMaxColors))
        return std::make_pair(make_color_question(*c), QuestionSemantics::color(*c));
    if (auto s = best_value([](const SceneObject& o) { return o.size_class; }, kNumSizes))
        return std::make_pair(make_size_question(*s), QuestionSemantics::size(*s));

    // Location: pick the half-plane closest to an even split.
    int best_side = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (int s = 0; s < 4; ++s) {
        int matches = 0;
        for (int c : candidates_)
            if (rule_answer(*scene_, c, QuestionSemantics::location(static_cast<Side>(s))) ==
                AnswerClass::Yes)
                ++matches;
        if (matches == 0 || matches == static_cast<int>(n)) continue;
        const int dist = std::abs(2 * matches - static_cast<int>(n));
        if (dist < best_dist) best_dist = dist, best_side = s;
    }
    if (best_side < 0) return std::nullopt;

    const Side side = static_cast<Side>(best_side);
    // When every candidate shares one category and the split is horizontal,
    // occasionally use the compound phrasing to vary the surface form.
    const int cat0 = scene_->objects[static_cast<std::size_t>(candidates_[0])].category;
    const bool same_cat = std::all_of(candidates_.begin(), candidates_.end(), [&](int c) {
        return scene_->objects[static_cast<std::size_t>(c)].category == cat0;
    });
    if (same_cat && (side == Side::Left || side == Side::Right) && rng_.coin(0.5))
        return std::make_pair(make_compound_question(cat0, side),
                              QuestionSemantics::location(side));
    return std::make_pair(make_location_question(side), QuestionSemantics::location(side));
}

void ScriptedQuestionPolicy::observe(const QuestionSemantics& sem, AnswerClass answer) {
    if (sem.kind == QuestionSemantics::Kind::Unparseable || answer == AnswerClass::NA) return;
    std::vector<int> kept;
    for (int c : candidates_)
        if (rule_answer(*scene_, c, sem) == answer) kept.push_back(c);
    if (!kept.empty()) candidates_ = std::move(kept);
}

GameRecord generate_gold_dialog(const Scene& scene, int target_id, std::uint64_t seed,
                                int max_turns) {
    if (max_turns < 1) throw InvalidSpec("generate_gold_dialog: max_turns >= 1");
    if (target_id < 0 || target_id >= static_cast<int>(scene.objects.size()))
        throw InvalidTarget("generate_gold_dialog: bad target id");

    ScriptedQuestionPolicy policy(scene, seed);
    GameRecord game;
    game.game_id = scene.scene_id + "#" + std::to_string(seed);
    game.scene_id = scene.scene_id;
    game.target_id = target_id;

    for (int t = 0; t < max_turns; ++t) {
        auto q = policy.next_question();
        if (!q) break;
        const AnswerClass a = rule_answer(scene, target_id, q->second);
        policy.observe(q->second, a);
        game.turns.emplace_back(q->first, a);
        if (policy.candidates().size() == 1) break;
    }
    if (game.turns.empty()) {
        // Nothing was informative; ask the target's category so the record
        // still carries one valid turn.
        const int cat = scene.objects[static_cast<std::size_t>(target_id)].category;
        game.turns.emplace_back(make_category_question(cat), AnswerClass::Yes);
    }

    game.guess = policy.best_guess();
    game.status = (*game.guess == target_id) ? GameRecord::Status::Success
                                             : GameRecord::Status::Failure;
    return game;
}

}  // namespace gwlab
