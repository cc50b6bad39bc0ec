// File I/O: PCM-16 WAV read/write and the little-endian binary matrix
// container used for frame features ("FRM1") and MFCC caches ("MFC1"):
// magic, u32 rows, u32 cols, then rows*cols float32 row-major.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trailrate/common.hpp"
#include "trailrate/dsp.hpp"

namespace trailrate {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file_text(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    return {bytes.begin(), bytes.end()};
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw DataError("short write: " + path.string());
}

inline void write_file_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << text;
}

namespace detail {

inline std::uint32_t read_u32(const std::vector<unsigned char>& b, std::size_t off) {
    return std::uint32_t(b[off]) | std::uint32_t(b[off + 1]) << 8 | std::uint32_t(b[off + 2]) << 16 |
           std::uint32_t(b[off + 3]) << 24;
}

inline std::uint16_t read_u16(const std::vector<unsigned char>& b, std::size_t off) {
    return static_cast<std::uint16_t>(std::uint16_t(b[off]) | std::uint16_t(b[off + 1]) << 8);
}

inline void push_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    b.push_back(v & 0xFF);
    b.push_back((v >> 8) & 0xFF);
    b.push_back((v >> 16) & 0xFF);
    b.push_back((v >> 24) & 0xFF);
}

inline void push_u16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(v & 0xFF);
    b.push_back((v >> 8) & 0xFF);
}

}  // namespace detail

// PCM 16-bit RIFF/WAVE. Stereo is downmixed by channel averaging and
// samples are normalized by 1/32768.
inline Signal read_wav(const std::filesystem::path& path) {
    const auto b = read_file_bytes(path);
    const std::string where = path.string();
    if (b.size() < 44 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + where);

    std::size_t pos = 12;
    bool have_fmt = false;
    std::uint16_t channels = 0, bits = 0, format = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_off = 0, data_len = 0;
    while (pos + 8 <= b.size()) {
        const std::uint32_t chunk_len = detail::read_u32(b, pos + 4);
        if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
            if (pos + 8 + 16 > b.size()) throw DataError("truncated fmt chunk: " + where);
            format = detail::read_u16(b, pos + 8);
            channels = detail::read_u16(b, pos + 10);
            sample_rate = detail::read_u32(b, pos + 12);
            bits = detail::read_u16(b, pos + 22);
            have_fmt = true;
        } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
            data_off = pos + 8;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1);
    }
    if (!have_fmt || data_off == 0) throw DataError("missing fmt/data chunk: " + where);
    if (format != 1) throw DataError("unsupported (non-PCM) wav encoding in " + where);
    if (bits != 16) throw DataError("expected 16-bit PCM in " + where);
    if (channels == 0 || sample_rate == 0) throw DataError("bad wav header in " + where);
    if (data_off + data_len > b.size()) throw DataError("truncated wav data in " + where);

    const std::size_t frames = data_len / (2 * channels);
    if (frames == 0) throw DataError("empty wav file: " + where);
    Signal sig;
    sig.sample_rate = static_cast<int>(sample_rate);
    sig.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
            const std::size_t off = data_off + (i * channels + c) * 2;
            const auto raw = static_cast<std::int16_t>(detail::read_u16(b, off));
            acc += double(raw);
        }
        sig.samples[i] = acc / (channels * 32768.0);
    }
    return sig;
}

inline void write_wav(const std::filesystem::path& path, const Signal& sig) {
    std::vector<unsigned char> b;
    b.reserve(44 + sig.samples.size() * 2);
    const std::uint32_t data_len = static_cast<std::uint32_t>(sig.samples.size() * 2);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    detail::push_u32(b, 36 + data_len);
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    detail::push_u32(b, 16);
    detail::push_u16(b, 1);  // PCM
    detail::push_u16(b, 1);  // mono
    detail::push_u32(b, static_cast<std::uint32_t>(sig.sample_rate));
    detail::push_u32(b, static_cast<std::uint32_t>(sig.sample_rate * 2));
    detail::push_u16(b, 2);
    detail::push_u16(b, 16);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    detail::push_u32(b, data_len);
    for (double v : sig.samples) {
        double clamped = std::max(-1.0, std::min(1.0, v));
        auto q = static_cast<long>(std::lround(clamped * 32768.0));
        q = std::max(-32768l, std::min(32767l, q));
        detail::push_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    write_file_bytes(path, b);
}

inline void write_mat_file(const std::filesystem::path& path, const Mat& m, const char magic[4]) {
    std::vector<unsigned char> b;
    b.reserve(12 + m.data.size() * 4);
    b.insert(b.end(), magic, magic + 4);
    detail::push_u32(b, static_cast<std::uint32_t>(m.rows));
    detail::push_u32(b, static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) {
        const auto f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::push_u32(b, bits);
    }
    write_file_bytes(path, b);
}

inline Mat read_mat_file(const std::filesystem::path& path, const char magic[4]) {
    const auto b = read_file_bytes(path);
    if (b.size() < 12 || std::memcmp(b.data(), magic, 4) != 0)
        throw DataError("bad magic in matrix file " + path.string() + " (expected " + std::string(magic, 4) + ")");
    const std::uint32_t rows = detail::read_u32(b, 4);
    const std::uint32_t cols = detail::read_u32(b, 8);
    if (b.size() != 12 + std::size_t(rows) * cols * 4) throw DataError("truncated matrix file " + path.string());
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        const std::uint32_t bits = detail::read_u32(b, 12 + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        m.data[i] = double(f);
    }
    return m;
}

inline constexpr char kFrameMagic[4] = {'F', 'R', 'M', '1'};
inline constexpr char kMfccMagic[4] = {'M', 'F', 'C', '1'};

inline void write_frames_file(const std::filesystem::path& p, const Mat& m) { write_mat_file(p, m, kFrameMagic); }
inline Mat read_frames_file(const std::filesystem::path& p) { return read_mat_file(p, kFrameMagic); }
inline void write_mfcc_file(const std::filesystem::path& p, const Mat& m) { write_mat_file(p, m, kMfccMagic); }
inline Mat read_mfcc_file(const std::filesystem::path& p) { return read_mat_file(p, kMfccMagic); }

}  // namespace trailrate
