// JSONL serialization for scenes and game logs. All json.hpp usage stays in
// this translation unit so the public headers depend only on std.

#include <fstream>

#include <json.hpp>

#include "gwlab/dataset.hpp"
#include "gwlab/world.hpp"

namespace gwlab {

using ojson = nlohmann::ordered_json;

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

// ---- scenes -----------------------------------------------------------------

void write_scenes(const std::vector<Scene>& scenes, const std::string& path) {
    auto out = open_out(path);
    for (const auto& scene : scenes) {
        ojson objs = ojson::array();
        for (const auto& o : scene.objects) {
            objs.push_back(ojson{
                {"id", o.id},
                {"category", category_names()[static_cast<std::size_t>(o.category)]},
                {"color", color_names()[static_cast<std::size_t>(o.color)]},
                {"size_class", size_names()[static_cast<std::size_t>(o.size_class)]},
                {"bbox", {o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]}},
            });
        }
        out << ojson{{"scene_id", scene.scene_id}, {"objects", std::move(objs)}}.dump()
            << '\n';
    }
}

std::vector<Scene> load_scenes(const std::string& path) {
    auto in = open_in(path);
    std::vector<Scene> scenes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            Scene scene;
            scene.scene_id = j.at("scene_id").get<std::string>();
            for (const auto& jo : j.at("objects")) {
                SceneObject o;
                o.id = jo.at("id").get<int>();
                o.category = category_index(jo.at("category").get<std::string>());
                o.color = color_index(jo.at("color").get<std::string>());
                o.size_class = size_index(jo.at("size_class").get<std::string>());
                if (o.category < 0 || o.color < 0 || o.size_class < 0)
                    throw SchemaError("unknown attribute name");
                const auto& bb = jo.at("bbox");
                for (int k = 0; k < 4; ++k) o.bbox[static_cast<std::size_t>(k)] = bb.at(k).get<double>();
                if (!(o.bbox[0] < o.bbox[2]) || !(o.bbox[1] < o.bbox[3]) ||
                    o.bbox[0] < 0.0 || o.bbox[1] < 0.0 || o.bbox[2] > 1.0 || o.bbox[3] > 1.0)
                    throw SchemaError("bad bbox");
                scene.objects.push_back(o);
            }
            if (scene.objects.size() < 2)
                throw SchemaError("scene needs >=2 objects");
            for (std::size_t i = 0; i < scene.objects.size(); ++i)
                if (scene.objects[i].id != static_cast<int>(i))
                    throw SchemaError("object ids must be 0..N-1 in order");
            scenes.push_back(std::move(scene));
        } catch (const SchemaError& e) {
            throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ojson::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scenes;
}

// ---- game log ------------------------------------------------------------------

std::string game_to_json_line(const GameRecord& game) {
    ojson turns = ojson::array();
    for (const auto& [q, a] : game.turns) turns.push_back({q, to_string(a)});
    ojson j{
        {"game_id", game.game_id},
        {"scene_id", game.scene_id},
        {"target_id", game.target_id},
        {"turns", std::move(turns)},
    };
    if (game.guess) j["guess"] = *game.guess;
    j["status"] = to_string(game.status);
    if (game.beliefs) j["beliefs"] = *game.beliefs;
    return j.dump();
}

GameRecord game_from_json_line(const std::string& line, std::size_t line_no) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const std::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    GameRecord g;
    try {
        g.game_id = j.at("game_id").get<std::string>();
        g.scene_id = j.at("scene_id").get<std::string>();
        g.target_id = j.at("target_id").get<int>();
        for (const auto& t : j.at("turns")) {
            if (!t.is_array() || t.size() != 2)
                throw ParseError("line " + std::to_string(line_no) + ": bad turn entry");
            g.turns.emplace_back(t.at(0).get<std::string>(),
                                 answer_from_string(t.at(1).get<std::string>()));
        }
        g.status = status_from_string(j.at("status").get<std::string>());
        if (j.contains("guess")) g.guess = j.at("guess").get<int>();
        if (j.contains("beliefs"))
            g.beliefs = j.at("beliefs").get<std::vector<std::vector<double>>>();
    } catch (const ojson::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }

    // Schema invariants.
    const bool completed = g.status != GameRecord::Status::Incomplete;
    if (completed && g.turns.empty())
        throw SchemaError("line " + std::to_string(line_no) + ": completed game without turns");
    if (completed != g.guess.has_value())
        throw SchemaError("line " + std::to_string(line_no) +
                          ": guess must be present exactly for completed games");
    if (g.target_id < 0)
        throw SchemaError("line " + std::to_string(line_no) + ": bad target_id");
    if (completed) {
        const bool correct = *g.guess == g.target_id;
        if (correct != (g.status == GameRecord::Status::Success))
            throw SchemaError("line " + std::to_string(line_no) +
                              ": status must be success exactly when guess == target_id");
    }
    return g;
}

std::vector<GameRecord> load_games(const std::string& path) {
    auto in = open_in(path);
    std::vector<GameRecord> games;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        games.push_back(game_from_json_line(line, line_no));
    }
    return games;
}

void write_games(const std::vector<GameRecord>& games, const std::string& path) {
    auto out = open_out(path);
    for (const auto& g : games) out << game_to_json_line(g) << '\n';
}

}  // namespace gwlab
