#include "gwlab/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace gwlab {

using ojson = nlohmann::ordered_json;

namespace {

ojson manifest_of(const ParamSet& params, const std::string& prefix = "") {
    ojson m = ojson::array();
    for (const auto& [name, t] : params)
        m.push_back(ojson::array({prefix + name, ojson::array({t.rows, t.cols})}));
    return m;
}

void write_values(std::ofstream& out, const ParamSet& params) {
    for (const auto& [name, t] : params) {
        for (double x : t.data) {
            const float f = static_cast<float>(x);
            char buf[4];
            std::memcpy(buf, &f, 4);
            out.write(buf, 4);
        }
    }
}

void write_checkpoint(const std::string& path, const ojson& header, const ParamSet& a,
                      const ParamSet* b = nullptr) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << header.dump() << '\n';
    write_values(out, a);
    if (b) write_values(out, *b);
    if (!out) throw IoError("write failed for '" + path + "'");
}

struct RawCheckpoint {
    ojson header;
    std::vector<float> values;
};

RawCheckpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line))
        throw IncompatibleCheckpoint("'" + path + "': missing header");
    RawCheckpoint raw;
    try {
        raw.header = ojson::parse(line);
    } catch (const std::exception& e) {
        throw IncompatibleCheckpoint("'" + path + "': bad header: " + e.what());
    }
    if (!raw.header.contains("format") ||
        raw.header.at("format").get<std::string>() != kCheckpointFormat)
        throw IncompatibleCheckpoint("'" + path + "': format string mismatch");

    std::size_t expected = 0;
    for (const auto& entry : raw.header.at("manifest"))
        expected += entry.at(1).at(0).get<std::size_t>() * entry.at(1).at(1).get<std::size_t>();
    raw.values.resize(expected);
    in.read(reinterpret_cast<char*>(raw.values.data()),
            static_cast<std::streamsize>(expected * 4));
    if (static_cast<std::size_t>(in.gcount()) != expected * 4)
        throw IncompatibleCheckpoint("'" + path + "': truncated parameter data");
    char extra;
    if (in.read(&extra, 1))
        throw IncompatibleCheckpoint("'" + path + "': trailing bytes after parameters");
    return raw;
}

/// Copies raw values into `params`, verifying manifest names and shapes.
void fill_params(const RawCheckpoint& raw, ParamSet& params, const std::string& prefix,
                 std::size_t& cursor, std::size_t manifest_offset) {
    const auto& manifest = raw.header.at("manifest");
    std::size_t entry_idx = manifest_offset;
    for (auto& [name, t] : params) {
        if (entry_idx >= manifest.size())
            throw IncompatibleCheckpoint("manifest shorter than expected layout");
        const auto& entry = manifest.at(entry_idx++);
        if (entry.at(0).get<std::string>() != prefix + name ||
            entry.at(1).at(0).get<std::size_t>() != t.rows ||
            entry.at(1).at(1).get<std::size_t>() != t.cols)
            throw IncompatibleCheckpoint("manifest/shape mismatch at '" + prefix + name + "'");
        for (double& x : t.data) x = static_cast<double>(raw.values[cursor++]);
    }
}

Vocabulary vocab_of(const RawCheckpoint& raw) {
    return Vocabulary::from_tokens(raw.header.at("vocab").get<std::vector<std::string>>());
}

ojson guesser_config_to_json(const GuesserConfig& cfg) {
    return ojson{
        {"hidden_size", cfg.enc.hidden},
        {"layer_count", cfg.enc.layers},
        {"n_categories", cfg.n_categories},
        {"n_colors", cfg.n_colors},
        {"answer_embed_size", cfg.answer_embed},
        {"head_hidden", cfg.head_hidden},
        {"alpha", cfg.alpha},
        {"variant", cfg.variant == GuesserVariant::PostFusion ? "post_fusion"
                                                              : "pre_concatenation"},
        {"answer_blind", cfg.answer_blind},
        {"max_question_len", cfg.max_question_len},
    };
}

GuesserConfig guesser_config_from_json(const ojson& j) {
    GuesserConfig cfg;
    cfg.enc.hidden = j.at("hidden_size").get<std::size_t>();
    cfg.enc.layers = j.at("layer_count").get<int>();
    cfg.n_categories = j.at("n_categories").get<int>();
    cfg.n_colors = j.at("n_colors").get<int>();
    cfg.answer_embed = j.at("answer_embed_size").get<std::size_t>();
    cfg.head_hidden = j.at("head_hidden").get<std::size_t>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.variant = j.at("variant").get<std::string>() == "post_fusion"
                      ? GuesserVariant::PostFusion
                      : GuesserVariant::PreConcatenation;
    cfg.answer_blind = j.at("answer_blind").get<bool>();
    cfg.max_question_len = j.at("max_question_len").get<std::size_t>();
    cfg.enc.feat = FeatureLayout{cfg.n_categories, cfg.n_colors}.dim();
    return cfg;
}

}  // namespace

std::string checkpoint_kind(const std::string& path) {
    return read_checkpoint(path).header.at("model_kind").get<std::string>();
}

// ---- oracle ---------------------------------------------------------------------

void save_oracle(const OracleModel& model, const std::string& path) {
    ojson header{
        {"format", kCheckpointFormat},
        {"model_kind", "oracle"},
        {"config",
         {{"hidden_size", model.cfg.enc.hidden},
          {"layer_count", model.cfg.enc.layers},
          {"n_categories", model.cfg.n_categories},
          {"n_colors", model.cfg.n_colors},
          {"category_embed_size", model.cfg.category_embed},
          {"oracle_hidden", model.cfg.mlp_hidden},
          {"max_question_len", model.cfg.max_question_len},
          {"weak", model.cfg.weak}}},
        {"vocab", model.vocab.tokens()},
        {"manifest", manifest_of(model.params)},
    };
    write_checkpoint(path, header, model.params);
}

OracleModel load_oracle(const std::string& path) {
    RawCheckpoint raw = read_checkpoint(path);
    if (raw.header.at("model_kind").get<std::string>() != "oracle")
        throw IncompatibleCheckpoint("'" + path + "': not an oracle checkpoint");
    const auto& j = raw.header.at("config");
    OracleConfig cfg;
    cfg.enc.hidden = j.at("hidden_size").get<std::size_t>();
    cfg.enc.layers = j.at("layer_count").get<int>();
    cfg.n_categories = j.at("n_categories").get<int>();
    cfg.n_colors = j.at("n_colors").get<int>();
    cfg.category_embed = j.at("category_embed_size").get<std::size_t>();
    cfg.mlp_hidden = j.at("oracle_hidden").get<std::size_t>();
    cfg.max_question_len = j.at("max_question_len").get<std::size_t>();
    cfg.weak = j.at("weak").get<bool>();
    cfg.enc.feat = FeatureLayout{cfg.n_categories, cfg.n_colors}.dim();

    OracleModel model = init_oracle(cfg, vocab_of(raw), 0);
    std::size_t cursor = 0;
    fill_params(raw, model.params, "", cursor, 0);
    return model;
}

// ---- guesser ----------------------------------------------------------------------

void save_guesser(const GuesserModel& model, const std::string& path) {
    ojson header{
        {"format", kCheckpointFormat},
        {"model_kind", "guesser"},
        {"config", guesser_config_to_json(model.cfg)},
        {"vocab", model.vocab.tokens()},
        {"manifest", manifest_of(model.params)},
    };
    write_checkpoint(path, header, model.params);
}

GuesserModel load_guesser(const std::string& path) {
    RawCheckpoint raw = read_checkpoint(path);
    if (raw.header.at("model_kind").get<std::string>() != "guesser")
        throw IncompatibleCheckpoint("'" + path + "': not a guesser checkpoint");
    GuesserModel model =
        init_guesser(guesser_config_from_json(raw.header.at("config")), vocab_of(raw), 0);
    std::size_t cursor = 0;
    fill_params(raw, model.params, "", cursor, 0);
    return model;
}

// ---- questioner --------------------------------------------------------------------

void save_questioner(const QuestionerModel& model, const std::string& path) {
    ojson manifest = manifest_of(model.estimator.params, "est.");
    for (auto& entry : manifest_of(model.dec)) manifest.push_back(entry);
    ojson header{
        {"format", kCheckpointFormat},
        {"model_kind", "questioner"},
        {"config",
         {{"estimator", guesser_config_to_json(model.estimator.cfg)},
          {"word_embed_size", model.cfg.word_embed},
          {"max_question_len", model.cfg.max_question_len},
          {"max_turns", model.cfg.max_turns},
          {"freeze_estimator", model.cfg.freeze_estimator}}},
        {"vocab", model.vocab().tokens()},
        {"manifest", std::move(manifest)},
    };
    write_checkpoint(path, header, model.estimator.params, &model.dec);
}

QuestionerModel load_questioner(const std::string& path) {
    RawCheckpoint raw = read_checkpoint(path);
    if (raw.header.at("model_kind").get<std::string>() != "questioner")
        throw IncompatibleCheckpoint("'" + path + "': not a questioner checkpoint");
    const auto& j = raw.header.at("config");
    GuesserModel estimator =
        init_guesser(guesser_config_from_json(j.at("estimator")), vocab_of(raw), 0);

    QuestionerConfig cfg;
    cfg.word_embed = j.at("word_embed_size").get<std::size_t>();
    cfg.max_question_len = j.at("max_question_len").get<std::size_t>();
    cfg.max_turns = j.at("max_turns").get<int>();
    cfg.freeze_estimator = j.at("freeze_estimator").get<bool>();

    QuestionerModel model = init_questioner(cfg, std::move(estimator), 0);
    std::size_t cursor = 0;
    fill_params(raw, model.estimator.params, "est.", cursor, 0);
    fill_params(raw, model.dec, "", cursor, model.estimator.params.tensor_count());
    return model;
}

}  // namespace gwlab
