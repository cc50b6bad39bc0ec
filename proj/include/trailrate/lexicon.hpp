// Emotion lexicon: words mapped to subsets of the fixed ten categories
// (eight emotions plus two sentiments), and the normalized emotion vector
// computed from a token sequence. A small bundled lexicon ships for tests
// and the synthetic corpus; full-size lexicons load from "word<TAB>category"
// files.
#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "trailrate/common.hpp"

namespace trailrate {

inline constexpr std::size_t kEmotionCategories = 10;

// Fixed category order; vector component i counts category i.
inline constexpr std::array<const char*, kEmotionCategories> kCategoryNames = {
    "anger", "anticipation", "joy", "trust", "disgust", "sadness", "surprise", "fear", "positive", "negative"};

inline int category_index(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
        if (name == kCategoryNames[i]) return static_cast<int>(i);
    return -1;
}

class EmotionLexicon {
public:
    void add(const std::string& word, std::string_view category) {
        const int idx = category_index(category);
        if (idx < 0) throw DataError("unknown emotion category \"" + std::string(category) + "\"");
        entries_[word] |= static_cast<std::uint16_t>(1u << idx);
    }

    std::uint16_t categories_of(const std::string& word) const {
        auto it = entries_.find(word);
        return it == entries_.end() ? 0 : it->second;
    }

    bool contains(const std::string& word) const { return entries_.count(word) != 0; }
    std::size_t size() const { return entries_.size(); }

    // Lines of "word<TAB>category"; blank lines and '#' comments skipped.
    static EmotionLexicon from_text(const std::string& text) {
        EmotionLexicon lex;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
                throw DataError("lexicon line " + std::to_string(lineno) + ": expected word<TAB>category");
            try {
                lex.add(line.substr(0, tab), line.substr(tab + 1));
            } catch (const DataError& e) {
                throw DataError("lexicon line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return lex;
    }

private:
    std::unordered_map<std::string, std::uint16_t> entries_;
};

// Component c = (tokens mapped to category c) / max(1, token count).
inline std::vector<double> emotion_vector(const std::vector<std::string>& tokens, const EmotionLexicon& lexicon) {
    std::vector<double> v(kEmotionCategories, 0.0);
    for (const auto& tok : tokens) {
        const std::uint16_t mask = lexicon.categories_of(tok);
        if (mask == 0) continue;
        for (std::size_t c = 0; c < kEmotionCategories; ++c)
            if (mask & (1u << c)) v[c] += 1.0;
    }
    const double denom = double(std::max<std::size_t>(1, tokens.size()));
    for (double& x : v) x /= denom;
    return v;
}

namespace detail {

struct LexEntry {
    const char* word;
    const char* category;
};

// Compact bundled lexicon. Word choice skews toward trailer dialogue;
// multi-category words repeat.
inline constexpr LexEntry kBundledLexicon[] = {
    {"kill", "anger"},        {"kill", "fear"},         {"kill", "negative"},
    {"blood", "disgust"},     {"blood", "fear"},        {"blood", "negative"},
    {"gun", "fear"},          {"gun", "negative"},      {"gun", "anger"},
    {"scream", "fear"},       {"scream", "surprise"},   {"scream", "negative"},
    {"terror", "fear"},       {"terror", "negative"},
    {"brutal", "anger"},      {"brutal", "fear"},       {"brutal", "negative"},
    {"corpse", "disgust"},    {"corpse", "sadness"},    {"corpse", "negative"},
    {"dread", "fear"},        {"dread", "anticipation"}, {"dread", "negative"},
    {"vengeance", "anger"},   {"vengeance", "negative"},
    {"slaughter", "anger"},   {"slaughter", "disgust"}, {"slaughter", "fear"}, {"slaughter", "negative"},
    {"menace", "fear"},       {"menace", "negative"},
    {"carnage", "disgust"},   {"carnage", "fear"},      {"carnage", "negative"},
    {"murder", "anger"},      {"murder", "fear"},       {"murder", "sadness"}, {"murder", "negative"},
    {"knife", "fear"},        {"knife", "negative"},
    {"death", "sadness"},     {"death", "fear"},        {"death", "negative"},
    {"demon", "fear"},        {"demon", "negative"},
    {"ghost", "fear"},        {"ghost", "surprise"},    {"ghost", "negative"},
    {"war", "anger"},         {"war", "fear"},          {"war", "sadness"}, {"war", "negative"},
    {"fight", "anger"},       {"fight", "negative"},
    {"shoot", "anger"},       {"shoot", "fear"},        {"shoot", "negative"},
    {"stab", "anger"},        {"stab", "negative"},
    {"die", "sadness"},       {"die", "fear"},          {"die", "negative"},
    {"dead", "sadness"},      {"dead", "negative"},
    {"evil", "anger"},        {"evil", "disgust"},      {"evil", "fear"}, {"evil", "negative"},
    {"cruel", "anger"},       {"cruel", "sadness"},     {"cruel", "negative"},
    {"savage", "anger"},      {"savage", "fear"},       {"savage", "negative"},
    {"wound", "sadness"},     {"wound", "negative"},
    {"pain", "sadness"},      {"pain", "fear"},         {"pain", "negative"},
    {"torture", "anger"},     {"torture", "disgust"},   {"torture", "fear"}, {"torture", "negative"},
    {"threat", "fear"},       {"threat", "anger"},      {"threat", "negative"},
    {"curse", "anger"},       {"curse", "negative"},
    {"grim", "sadness"},      {"grim", "negative"},
    {"doom", "fear"},         {"doom", "negative"},
    {"panic", "fear"},        {"panic", "negative"},
    {"rage", "anger"},        {"rage", "negative"},
    {"hate", "anger"},        {"hate", "disgust"},      {"hate", "negative"},
    {"vile", "disgust"},      {"vile", "negative"},
    {"rot", "disgust"},       {"rot", "negative"},
    {"filth", "disgust"},     {"filth", "negative"},
    {"beast", "fear"},        {"beast", "negative"},
    {"monster", "fear"},      {"monster", "negative"},
    {"nightmare", "fear"},    {"nightmare", "sadness"}, {"nightmare", "negative"},
    {"darkness", "fear"},     {"darkness", "sadness"},  {"darkness", "negative"},
    {"grave", "sadness"},     {"grave", "fear"},        {"grave", "negative"},
    {"cry", "sadness"},       {"cry", "negative"},
    {"tears", "sadness"},     {"tears", "negative"},
    {"lost", "sadness"},      {"lost", "negative"},
    {"alone", "sadness"},     {"alone", "negative"},
    {"betray", "anger"},      {"betray", "sadness"},    {"betray", "surprise"}, {"betray", "negative"},
    {"revenge", "anger"},     {"revenge", "anticipation"}, {"revenge", "negative"},
    {"danger", "fear"},       {"danger", "negative"},
    {"chaos", "fear"},        {"chaos", "anger"},       {"chaos", "negative"},
    {"havoc", "anger"},       {"havoc", "negative"},
    {"joy", "joy"},           {"joy", "positive"},
    {"sunshine", "joy"},      {"sunshine", "positive"},
    {"hug", "joy"},           {"hug", "trust"},         {"hug", "positive"},
    {"smile", "joy"},         {"smile", "positive"},
    {"laughter", "joy"},      {"laughter", "surprise"}, {"laughter", "positive"},
    {"family", "trust"},      {"family", "joy"},        {"family", "positive"},
    {"wonder", "surprise"},   {"wonder", "joy"},        {"wonder", "positive"},
    {"delight", "joy"},       {"delight", "positive"},
    {"charm", "joy"},         {"charm", "trust"},       {"charm", "positive"},
    {"gentle", "trust"},      {"gentle", "positive"},
    {"love", "joy"},          {"love", "trust"},        {"love", "positive"},
    {"friend", "trust"},      {"friend", "joy"},        {"friend", "positive"},
    {"happy", "joy"},         {"happy", "positive"},
    {"hope", "anticipation"}, {"hope", "trust"},        {"hope", "positive"},
    {"dream", "anticipation"}, {"dream", "joy"},        {"dream", "positive"},
    {"magic", "surprise"},    {"magic", "joy"},         {"magic", "positive"},
    {"adventure", "anticipation"}, {"adventure", "joy"}, {"adventure", "positive"},
    {"fun", "joy"},           {"fun", "positive"},
    {"play", "joy"},          {"play", "positive"},
    {"sweet", "joy"},         {"sweet", "positive"},
    {"brave", "trust"},       {"brave", "positive"},
    {"hero", "trust"},        {"hero", "joy"},          {"hero", "positive"},
    {"kind", "trust"},        {"kind", "joy"},          {"kind", "positive"},
    {"warm", "trust"},        {"warm", "joy"},          {"warm", "positive"},
    {"bright", "joy"},        {"bright", "positive"},
    {"laugh", "joy"},         {"laugh", "positive"},
    {"celebrate", "joy"},     {"celebrate", "anticipation"}, {"celebrate", "positive"},
    {"gift", "joy"},          {"gift", "surprise"},     {"gift", "positive"},
    {"peace", "trust"},       {"peace", "joy"},         {"peace", "positive"},
    {"rescue", "trust"},      {"rescue", "surprise"},   {"rescue", "positive"},
    {"triumph", "joy"},       {"triumph", "anticipation"}, {"triumph", "positive"},
    {"miracle", "surprise"},  {"miracle", "joy"},       {"miracle", "positive"},
    {"waiting", "anticipation"},
    {"sudden", "surprise"},
    {"mystery", "anticipation"}, {"mystery", "surprise"},
    {"secret", "anticipation"}, {"secret", "surprise"},
    {"storm", "fear"},        {"storm", "negative"},
    {"shadow", "fear"},
    {"journey", "anticipation"},
    {"destiny", "anticipation"},
};

}  // namespace detail

// The lexicon shipped with the toolkit; a few hundred entries, enough for
// tests and the synthetic corpus generator.
inline const EmotionLexicon& bundled_lexicon() {
    static const EmotionLexicon lex = [] {
        EmotionLexicon l;
        for (const auto& e : detail::kBundledLexicon) l.add(e.word, e.category);
        return l;
    }();
    return lex;
}

}  // namespace trailrate
