#include "gwlab/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "gwlab/rng.hpp"

namespace gwlab {

namespace {
const std::array<std::string, Vocabulary::kNumSpecials> kSpecials = {
    "[PAD]", "[SOS]", "[EOS]", "[UNK]", "[CLS]"};
}

Vocabulary::Vocabulary() {
    for (const auto& s : kSpecials) {
        index_.emplace(s, tokens_.size());
        tokens_.push_back(s);
    }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kNumSpecials)
        throw SchemaError("vocabulary: missing special tokens");
    for (std::size_t i = 0; i < kNumSpecials; ++i)
        if (tokens[i] != kSpecials[i])
            throw SchemaError("vocabulary: special token " + std::to_string(i) +
                              " is '" + tokens[i] + "', expected '" + kSpecials[i] + "'");
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.index_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        if (!v.index_.emplace(v.tokens_[i], i).second)
            throw SchemaError("vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
    return v;
}

std::size_t Vocabulary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return index_.count(std::string(token)) != 0;
}

Vocabulary Vocabulary::extended(const std::vector<std::string>& extra) const {
    std::vector<std::string> tokens = tokens_;
    for (const auto& t : extra)
        if (!contains(t)) tokens.push_back(t);
    return from_tokens(std::move(tokens));
}

std::vector<std::string> tokenize_question(std::string_view text) {
    std::string stripped(text);
    while (!stripped.empty() && (stripped.back() == '?' || stripped.back() == ' ' ||
                                 stripped.back() == '\n' || stripped.back() == '\r'))
        stripped.pop_back();
    std::vector<std::string> words;
    std::string cur;
    for (char ch : stripped) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

QuestionTokens to_question_tokens(std::string_view question, const Vocabulary& vocab,
                                  std::size_t max_len) {
    QuestionTokens out;
    out.ids.push_back(Vocabulary::kCls);
    for (const auto& w : tokenize_question(question)) {
        if (out.ids.size() >= max_len) {
            out.truncated = true;
            break;
        }
        out.ids.push_back(vocab.id(w));
    }
    return out;
}

Vocabulary build_vocab(const std::vector<GameRecord>& games, std::size_t min_freq) {
    if (min_freq < 1) throw InvalidSpec("build_vocab: min_freq >= 1");
    std::map<std::string, std::size_t> freq;  // ordered map keeps ties lexicographic
    for (const auto& g : games)
        for (const auto& [q, a] : g.turns)
            for (const auto& w : tokenize_question(q)) ++freq[w];

    std::vector<std::pair<std::string, std::size_t>> entries;
    for (const auto& [tok, n] : freq)
        if (n >= min_freq) entries.emplace_back(tok, n);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens(kSpecials.begin(), kSpecials.end());
    for (auto& [tok, n] : entries) tokens.push_back(std::move(tok));
    return Vocabulary::from_tokens(std::move(tokens));
}

SplitResult split_games(const std::vector<GameRecord>& games,
                        std::array<double, 3> ratios, std::uint64_t seed) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidSpec("split_games: ratios must sum to 1");

    std::vector<std::string> scene_ids;
    {
        std::map<std::string, bool> seen;
        for (const auto& g : games)
            if (!seen[g.scene_id]) seen[g.scene_id] = true;
        for (const auto& [id, _] : seen) scene_ids.push_back(id);
    }
    Rng rng(seed);
    for (std::size_t i = scene_ids.size(); i > 1; --i)
        std::swap(scene_ids[i - 1], scene_ids[rng.index(i)]);

    const std::size_t s = scene_ids.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(s)));
    const std::size_t n_valid = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(s)));

    std::unordered_map<std::string, int> bucket;
    for (std::size_t i = 0; i < s; ++i)
        bucket[scene_ids[i]] = i < n_train ? 0 : (i < n_train + n_valid ? 1 : 2);

    SplitResult out;
    for (const auto& g : games) {
        switch (bucket[g.scene_id]) {
            case 0: out.train.push_back(g); break;
            case 1: out.valid.push_back(g); break;
            default: out.test.push_back(g); break;
        }
    }
    return out;
}

}  // namespace gwlab
