// Shared basics: error types, label/modality enums, a small row-major
// matrix, hashing and base64 helpers.
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trailrate {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 1, DataError -> 2,
// NumericError -> 3. ShapeError is a programming/contract violation and is
// treated as a config-level failure by the CLI.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};

enum class Label : int { Green = 0, Red = 1 };

inline const char* label_name(Label l) { return l == Label::Green ? "green" : "red"; }

inline Label parse_label(std::string_view s) {
    if (s == "green") return Label::Green;
    if (s == "red") return Label::Red;
    throw DataError("unknown label \"" + std::string(s) + "\" (expected \"green\" or \"red\")");
}

enum class Modality : int { Text = 0, Audio = 1, Video = 2 };

inline const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Text: return "text";
        case Modality::Audio: return "audio";
        default: return "video";
    }
}

inline Modality parse_modality(std::string_view s) {
    if (s == "text") return Modality::Text;
    if (s == "audio") return Modality::Audio;
    if (s == "video") return Modality::Video;
    throw ConfigError("unknown modality \"" + std::string(s) + "\"");
}

// Dense row-major matrix of doubles. Used for MFCC matrices, frame
// features and other non-differentiable numeric data.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    bool empty() const { return rows == 0 || cols == 0; }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
    }
};

// FNV-1a, used for OOV bucket hashing and seed derivation. Fixed constants
// so hashes are stable across platforms and runs.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

inline void check_all_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) check_finite(x, what);
}

namespace base64 {

inline constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(const unsigned char* data, std::size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        std::uint32_t chunk = std::uint32_t(data[i]) << 16;
        if (i + 1 < n) chunk |= std::uint32_t(data[i + 1]) << 8;
        if (i + 2 < n) chunk |= std::uint32_t(data[i + 2]);
        out.push_back(kAlphabet[(chunk >> 18) & 63]);
        out.push_back(kAlphabet[(chunk >> 12) & 63]);
        out.push_back(i + 1 < n ? kAlphabet[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < n ? kAlphabet[chunk & 63] : '=');
    }
    return out;
}

inline std::vector<unsigned char> decode(std::string_view s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw DataError("invalid base64 character");
    };
    std::vector<unsigned char> out;
    out.reserve(s.size() / 4 * 3);
    for (std::size_t i = 0; i + 3 < s.size(); i += 4) {
        int a = val(s[i]), b = val(s[i + 1]), c = val(s[i + 2]), d = val(s[i + 3]);
        if (a < 0 || b < 0) throw DataError("truncated base64 block");
        out.push_back(static_cast<unsigned char>((a << 2) | (b >> 4)));
        if (c >= 0) out.push_back(static_cast<unsigned char>(((b & 15) << 4) | (c >> 2)));
        if (c >= 0 && d >= 0) out.push_back(static_cast<unsigned char>(((c & 3) << 6) | d));
    }
    return out;
}

}  // namespace base64

inline std::string encode_doubles_b64(const std::vector<double>& v) {
    return base64::encode(reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(double));
}

inline std::vector<double> decode_doubles_b64(std::string_view s, std::size_t expected) {
    auto bytes = base64::decode(s);
    if (bytes.size() != expected * sizeof(double)) throw DataError("tensor payload size mismatch");
    std::vector<double> out(expected);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

}  // namespace trailrate
