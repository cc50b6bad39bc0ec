// Data model and ingestion: trailer instances, SRT subtitle parsing,
// JSONL manifests with side files, and fold-local vocabularies.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "trailrate/common.hpp"
#include "trailrate/dsp.hpp"
#include "trailrate/io.hpp"

namespace trailrate {

// One sample. Audio arrives either as a raw signal or as a precomputed
// MFCC matrix, never both.
struct TrailerInstance {
    std::string id;
    Label label = Label::Green;
    std::vector<std::string> tokens;
    std::optional<Signal> audio;
    std::optional<Mat> audio_features;    // cached MFCC, one row per frame
    Mat frames;                           // F_v x d_v
    std::optional<Mat> token_vectors;     // optional precomputed embeddings, one row per token
    std::map<std::string, std::string> meta;

    bool has_audio() const { return audio.has_value() || audio_features.has_value(); }

    void validate() const {
        if (audio.has_value() == audio_features.has_value())
            throw DataError("instance " + id + ": exactly one of audio signal / audio features must be present");
        if (frames.rows < 1 || frames.cols < 1) throw DataError("instance " + id + ": frames must be non-empty");
        if (tokens.empty() && meta.find("empty_ok") == meta.end())
            throw DataError("instance " + id + ": empty token sequence (set meta.empty_ok to allow)");
    }

    friend bool operator==(const TrailerInstance& a, const TrailerInstance& b) {
        auto sig_eq = [](const std::optional<Signal>& x, const std::optional<Signal>& y) {
            if (x.has_value() != y.has_value()) return false;
            return !x || (x->sample_rate == y->sample_rate && x->samples == y->samples);
        };
        return a.id == b.id && a.label == b.label && a.tokens == b.tokens && sig_eq(a.audio, b.audio) &&
               a.audio_features == b.audio_features && a.frames == b.frames && a.token_vectors == b.token_vectors &&
               a.meta == b.meta;
    }
};

struct Corpus {
    std::vector<TrailerInstance> instances;

    std::size_t size() const { return instances.size(); }

    std::array<std::size_t, 2> class_counts() const {
        std::array<std::size_t, 2> counts{0, 0};
        for (const auto& inst : instances) ++counts[static_cast<int>(inst.label)];
        return counts;
    }

    void check_unique_ids() const {
        std::set<std::string> seen;
        for (const auto& inst : instances)
            if (!seen.insert(inst.id).second) throw DataError("duplicate instance id: " + inst.id);
    }
};

// Lowercase tokens split on non-alphanumeric boundaries; apostrophes stay
// when they sit between alphanumerics ("don't" is one token).
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
                   std::isalnum(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back('\'');
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct SrtParse {
    std::vector<std::string> tokens;
    std::vector<std::string> warnings;
};

namespace detail {

inline bool digits_only(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// "HH:MM:SS,mmm --> HH:MM:SS,mmm", optionally followed by attributes.
inline bool is_timestamp_line(const std::string& s) {
    static constexpr char pattern[] = "dd:dd:dd,ddd --> dd:dd:dd,ddd";
    constexpr std::size_t n = sizeof(pattern) - 1;
    if (s.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (pattern[i] == 'd') {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        } else if (s[i] != pattern[i]) {
            return false;
        }
    }
    return s.size() == n || s[n] == ' ';
}

}  // namespace detail

// Drops cue indices and timestamp lines, keeps the words in cue order.
// Non-conforming blocks are skipped and reported as warnings, never as
// errors.
inline SrtParse parse_srt(const std::string& text) {
    SrtParse result;
    std::vector<std::vector<std::string>> blocks(1);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!blocks.back().empty()) blocks.emplace_back();
        } else {
            blocks.back().push_back(line);
        }
    }
    std::size_t block_no = 0;
    for (const auto& block : blocks) {
        if (block.empty()) continue;
        ++block_no;
        std::size_t li = detail::digits_only(block[0]) ? 1 : 0;
        if (li >= block.size() || !detail::is_timestamp_line(block[li])) {
            result.warnings.push_back("block " + std::to_string(block_no) + ": missing or garbled timestamp, skipped");
            continue;
        }
        for (std::size_t i = li + 1; i < block.size(); ++i) {
            auto toks = tokenize(block[i]);
            result.tokens.insert(result.tokens.end(), toks.begin(), toks.end());
        }
    }
    return result;
}

// Renders tokens back to a minimal SRT, eight words per cue.
inline std::string render_srt(const std::vector<std::string>& tokens) {
    std::ostringstream out;
    const std::size_t per_cue = 8;
    std::size_t cue = 0;
    for (std::size_t i = 0; i < tokens.size(); i += per_cue) {
        ++cue;
        const std::size_t sec = 2 * (cue - 1);
        auto stamp = [](std::size_t s) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%02zu:%02zu:%02zu,000", s / 3600, (s / 60) % 60, s % 60);
            return std::string(buf);
        };
        out << cue << "\n" << stamp(sec) << " --> " << stamp(sec + 2) << "\n";
        for (std::size_t j = i; j < std::min(tokens.size(), i + per_cue); ++j) {
            if (j > i) out << ' ';
            out << tokens[j];
        }
        out << "\n\n";
    }
    return out.str();
}

namespace detail {

inline bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

// Manifest: one JSON record per line with fields
//   id, label ("green"|"red"), subtitle (srt path or inline token array),
//   audio (.wav or .mfc path), frames (.frm path), optional embeddings
//   (.frm path) and meta (string map).
// Side-file paths resolve relative to the manifest.
inline Corpus load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path.string());
    const auto base = manifest_path.parent_path();
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "manifest line " + std::to_string(lineno);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!rec.is_object()) throw DataError(where + ": record must be an object");
        for (const auto& [key, value] : rec.items()) {
            if (key != "id" && key != "label" && key != "subtitle" && key != "audio" && key != "frames" &&
                key != "embeddings" && key != "meta")
                throw DataError(where + ": unknown field \"" + key + "\"");
        }
        TrailerInstance inst;
        try {
            inst.id = rec.at("id").get<std::string>();
            inst.label = parse_label(rec.at("label").get<std::string>());

            const auto& sub = rec.at("subtitle");
            if (sub.is_array()) {
                for (const auto& t : sub) inst.tokens.push_back(t.get<std::string>());
            } else {
                const auto parsed = parse_srt(read_file_text(base / sub.get<std::string>()));
                inst.tokens = parsed.tokens;
            }

            const auto audio_path = rec.at("audio").get<std::string>();
            if (detail::ends_with(audio_path, ".wav"))
                inst.audio = read_wav(base / audio_path);
            else if (detail::ends_with(audio_path, ".mfc"))
                inst.audio_features = read_mfcc_file(base / audio_path);
            else
                throw DataError("audio path must end in .wav or .mfc: " + audio_path);

            inst.frames = read_frames_file(base / rec.at("frames").get<std::string>());
            if (rec.contains("embeddings"))
                inst.token_vectors = read_frames_file(base / rec.at("embeddings").get<std::string>());
            if (rec.contains("meta"))
                for (const auto& [k, v] : rec.at("meta").items()) inst.meta[k] = v.get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        inst.validate();
        corpus.instances.push_back(std::move(inst));
    }
    corpus.check_unique_ids();
    return corpus;
}

struct SaveOptions {
    bool subtitles_as_srt = true;  // otherwise inline token arrays
};

// Writes manifest.jsonl plus side files (srt/, wav/ or mfc/, frm/) under
// dir. Output is byte-deterministic for a given corpus.
inline std::filesystem::path save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                                         const SaveOptions& opts = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    if (opts.subtitles_as_srt) fs::create_directories(dir / "srt");
    fs::create_directories(dir / "frm");
    std::ostringstream manifest;
    for (const auto& inst : corpus.instances) {
        nlohmann::json rec;
        rec["id"] = inst.id;
        rec["label"] = label_name(inst.label);
        if (opts.subtitles_as_srt) {
            const auto rel = "srt/" + inst.id + ".srt";
            write_file_text(dir / rel, render_srt(inst.tokens));
            rec["subtitle"] = rel;
        } else {
            rec["subtitle"] = inst.tokens;
        }
        if (inst.audio.has_value()) {
            fs::create_directories(dir / "wav");
            const auto rel = "wav/" + inst.id + ".wav";
            write_wav(dir / rel, *inst.audio);
            rec["audio"] = rel;
        } else if (inst.audio_features.has_value()) {
            fs::create_directories(dir / "mfc");
            const auto rel = "mfc/" + inst.id + ".mfc";
            write_mfcc_file(dir / rel, *inst.audio_features);
            rec["audio"] = rel;
        }
        {
            const auto rel = "frm/" + inst.id + ".frm";
            write_frames_file(dir / rel, inst.frames);
            rec["frames"] = rel;
        }
        if (inst.token_vectors.has_value()) {
            fs::create_directories(dir / "emb");
            const auto rel = "emb/" + inst.id + ".frm";
            write_frames_file(dir / rel, *inst.token_vectors);
            rec["embeddings"] = rel;
        }
        if (!inst.meta.empty()) {
            nlohmann::json meta;
            for (const auto& [k, v] : inst.meta) meta[k] = v;
            rec["meta"] = meta;
        }
        manifest << rec.dump() << "\n";
    }
    const auto manifest_path = dir / "manifest.jsonl";
    write_file_text(manifest_path, manifest.str());
    return manifest_path;
}

// Fold-local vocabulary. Indices are assigned by (frequency desc, word
// asc); unseen words hash into a fixed block of OOV buckets after the
// vocabulary, and one final PAD row stands in for empty token lists.
struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t oov_buckets = 1024;

    std::size_t size() const { return words.size(); }
    std::size_t table_rows() const { return words.size() + oov_buckets + 1; }
    std::size_t pad_row() const { return words.size() + oov_buckets; }

    std::size_t encode(const std::string& word) const {
        auto it = index.find(word);
        if (it != index.end()) return it->second;
        return words.size() + static_cast<std::size_t>(fnv1a(word) % oov_buckets);
    }
};

template <typename InstanceIter>
Vocabulary build_vocab(InstanceIter begin, InstanceIter end, std::size_t min_freq = 1, std::size_t oov_buckets = 1024) {
    std::unordered_map<std::string, std::size_t> freq;
    bool any = false;
    for (auto it = begin; it != end; ++it) {
        any = true;
        for (const auto& tok : it->tokens) ++freq[tok];
    }
    if (!any) throw DataError("build_vocab: empty training set");
    std::vector<std::pair<std::string, std::size_t>> entries;
    entries.reserve(freq.size());
    for (auto& [word, count] : freq)
        if (count >= min_freq) entries.emplace_back(word, count);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    vocab.oov_buckets = oov_buckets;
    vocab.words.reserve(entries.size());
    for (auto& [word, count] : entries) {
        vocab.index.emplace(word, vocab.words.size());
        vocab.words.push_back(word);
    }
    return vocab;
}

inline Vocabulary build_vocab(const std::vector<const TrailerInstance*>& instances, std::size_t min_freq = 1,
                              std::size_t oov_buckets = 1024) {
    struct Deref {
        const std::vector<const TrailerInstance*>* v;
        std::size_t i;
        const TrailerInstance& operator*() const { return *(*v)[i]; }
        const TrailerInstance* operator->() const { return (*v)[i]; }
        bool operator!=(const Deref& o) const { return i != o.i; }
        Deref& operator++() {
            ++i;
            return *this;
        }
    };
    return build_vocab(Deref{&instances, 0}, Deref{&instances, instances.size()}, min_freq, oov_buckets);
}

}  // namespace trailrate
