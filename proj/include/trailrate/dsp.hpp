// Audio front-end: framing, spectra, mel filterbank, log-mel, MFCC and
// fixed-length chunk averaging. Pure functions over Signal/Mat; identical
// input and config give bit-identical output.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "trailrate/common.hpp"

namespace trailrate {

struct Signal {
    std::vector<double> samples;
    int sample_rate = 16000;

    std::size_t size() const { return samples.size(); }
    double seconds() const { return double(samples.size()) / sample_rate; }
};

struct DspConfig {
    std::size_t frame_len = 400;  // 25 ms at 16 kHz
    std::size_t hop = 160;        // 10 ms
    std::size_t n_fft = 512;
    std::size_t n_mels = 26;
    std::size_t n_coeffs = 13;
    double fmin = 0.0;
    double fmax = 8000.0;
    double pre_emphasis = 0.97;
    double log_floor = 1e-10;

    void validate(int sample_rate) const {
        if (hop == 0 || hop > frame_len) throw ConfigError("dsp: need 0 < hop <= frame_len");
        if (frame_len > n_fft) throw ConfigError("dsp: need frame_len <= n_fft");
        if ((n_fft & (n_fft - 1)) != 0 || n_fft == 0) throw ConfigError("dsp: n_fft must be a power of two");
        if (fmin < 0 || fmin >= fmax) throw ConfigError("dsp: need 0 <= fmin < fmax");
        if (fmax > sample_rate / 2.0) throw ConfigError("dsp: fmax above Nyquist");
        if (n_coeffs > n_mels) throw ConfigError("dsp: n_coeffs must not exceed n_mels");
        if (log_floor <= 0) throw ConfigError("dsp: log_floor must be positive");
    }
};

// 2595 * log10(1 + f/700); the usual mel scale, zero at 0 Hz.
inline double hz_to_mel(double f) {
    if (f < 0) throw ConfigError("hz_to_mel: negative frequency");
    return 2595.0 * std::log10(1.0 + f / 700.0);
}

inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Frame count for a signal of n samples: floor((n - frame_len)/hop) + 1.
inline std::size_t frame_count(std::size_t n, const DspConfig& cfg) {
    if (n < cfg.frame_len) throw DataError("signal shorter than one frame");
    return (n - cfg.frame_len) / cfg.hop + 1;
}

// Pre-emphasis over the whole signal (y[0] = x[0]), then strided frames,
// each Hamming-windowed.
inline Mat frame_signal(const Signal& sig, const DspConfig& cfg) {
    cfg.validate(sig.sample_rate);
    const std::size_t n = sig.size();
    const std::size_t frames = frame_count(n, cfg);
    std::vector<double> emphasized(n);
    emphasized[0] = sig.samples[0];
    for (std::size_t t = 1; t < n; ++t) emphasized[t] = sig.samples[t] - cfg.pre_emphasis * sig.samples[t - 1];

    std::vector<double> window(cfg.frame_len, 1.0);
    if (cfg.frame_len > 1)
        for (std::size_t t = 0; t < cfg.frame_len; ++t)
            window[t] = 0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 * double(t) / double(cfg.frame_len - 1));

    Mat out(frames, cfg.frame_len);
    for (std::size_t f = 0; f < frames; ++f) {
        const double* src = emphasized.data() + f * cfg.hop;
        double* dst = out.row_ptr(f);
        for (std::size_t t = 0; t < cfg.frame_len; ++t) dst[t] = src[t] * window[t];
    }
    return out;
}

namespace detail {

// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * 3.14159265358979323846 / double(len);
        const std::complex<double> wn(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
}

}  // namespace detail

// Magnitudes of the one-sided DFT of a real frame zero-padded to n_fft.
inline std::vector<double> dft_magnitude(std::span<const double> frame, std::size_t n_fft) {
    if ((n_fft & (n_fft - 1)) != 0 || n_fft == 0) throw ConfigError("dft_magnitude: n_fft must be a power of two");
    if (frame.size() > n_fft) throw ShapeError("dft_magnitude: frame longer than n_fft");
    std::vector<std::complex<double>> a(n_fft, {0.0, 0.0});
    for (std::size_t i = 0; i < frame.size(); ++i) a[i] = {frame[i], 0.0};
    detail::fft(a);
    std::vector<double> mag(n_fft / 2 + 1);
    for (std::size_t k = 0; k <= n_fft / 2; ++k) mag[k] = std::abs(a[k]);
    return mag;
}

// Triangular filters with peaks at n_mels + 2 mel-equispaced points
// between fmin and fmax, quantized to FFT bins via
// bin = floor((n_fft + 1) * hz / sample_rate). Peak height is exactly 1
// at the center bin; no area normalization. A filter whose three support
// points collapse onto one bin cannot be built at this FFT resolution.
inline Mat mel_filterbank(const DspConfig& cfg, int sample_rate) {
    cfg.validate(sample_rate);
    const std::size_t bins = cfg.n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(cfg.fmax);
    std::vector<std::size_t> bin(cfg.n_mels + 2);
    for (std::size_t j = 0; j < cfg.n_mels + 2; ++j) {
        const double mel = mel_lo + (mel_hi - mel_lo) * double(j) / double(cfg.n_mels + 1);
        const double hz = mel_to_hz(mel);
        bin[j] = static_cast<std::size_t>(std::floor((double(cfg.n_fft) + 1.0) * hz / double(sample_rate)));
        if (bin[j] > cfg.n_fft / 2) bin[j] = cfg.n_fft / 2;
    }
    Mat fb(cfg.n_mels, bins);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const std::size_t lo = bin[m], mid = bin[m + 1], hi = bin[m + 2];
        if (lo == mid && mid == hi)
            throw ConfigError("mel_filterbank: filter " + std::to_string(m) +
                              " is empty at this FFT resolution (n_mels too large)");
        fb.at(m, mid) = 1.0;
        for (std::size_t k = lo + 1; k < mid; ++k) fb.at(m, k) = double(k - lo) / double(mid - lo);
        for (std::size_t k = mid + 1; k < hi; ++k) fb.at(m, k) = double(hi - k) / double(hi - mid);
    }
    return fb;
}

// Per frame: filterbank applied to the power spectrum, then
// ln(max(value, log_floor)).
inline Mat log_mel_spectrogram(const Signal& sig, const DspConfig& cfg) {
    const Mat frames = frame_signal(sig, cfg);
    const Mat fb = mel_filterbank(cfg, sig.sample_rate);
    const std::size_t bins = cfg.n_fft / 2 + 1;
    Mat out(frames.rows, cfg.n_mels);
    for (std::size_t f = 0; f < frames.rows; ++f) {
        const auto mag = dft_magnitude({frames.row_ptr(f), frames.cols}, cfg.n_fft);
        std::vector<double> power(bins);
        for (std::size_t k = 0; k < bins; ++k) power[k] = mag[k] * mag[k];
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
            double acc = 0.0;
            const double* w = fb.row_ptr(m);
            for (std::size_t k = 0; k < bins; ++k) acc += w[k] * power[k];
            out.at(f, m) = std::log(std::max(acc, cfg.log_floor));
        }
    }
    return out;
}

// Orthonormal DCT-II of each log-mel row, keeping coefficients
// 0..n_coeffs-1.
inline Mat mfcc(const Signal& sig, const DspConfig& cfg) {
    const Mat lm = log_mel_spectrogram(sig, cfg);
    const std::size_t M = cfg.n_mels;
    Mat out(lm.rows, cfg.n_coeffs);
    std::vector<double> basis(cfg.n_coeffs * M);
    for (std::size_t j = 0; j < cfg.n_coeffs; ++j) {
        const double s = j == 0 ? std::sqrt(1.0 / double(M)) : std::sqrt(2.0 / double(M));
        for (std::size_t m = 0; m < M; ++m)
            basis[j * M + m] = s * std::cos(3.14159265358979323846 * double(j) * (2.0 * double(m) + 1.0) / (2.0 * double(M)));
    }
    for (std::size_t f = 0; f < lm.rows; ++f) {
        const double* src = lm.row_ptr(f);
        for (std::size_t j = 0; j < cfg.n_coeffs; ++j) {
            double acc = 0.0;
            const double* b = basis.data() + j * M;
            for (std::size_t m = 0; m < M; ++m) acc += b[m] * src[m];
            out.at(f, j) = acc;
        }
    }
    return out;
}

// Frame t belongs to chunk floor(t * n_chunks / F); each chunk row is the
// mean of its frames. A chunk left empty (only possible when F < n_chunks)
// copies the nearest non-empty chunk's mean, lower index on ties.
inline Mat chunk_matrix(const Mat& m, std::size_t n_chunks) {
    if (m.rows == 0 || m.cols == 0) throw DataError("chunk_matrix: empty input matrix");
    if (n_chunks == 0) throw ConfigError("chunk_matrix: n_chunks must be >= 1");
    Mat out(n_chunks, m.cols);
    std::vector<std::size_t> counts(n_chunks, 0);
    for (std::size_t t = 0; t < m.rows; ++t) {
        const std::size_t c = t * n_chunks / m.rows;
        ++counts[c];
        const double* src = m.row_ptr(t);
        double* dst = out.row_ptr(c);
        for (std::size_t j = 0; j < m.cols; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < n_chunks; ++c)
        if (counts[c] > 0)
            for (std::size_t j = 0; j < m.cols; ++j) out.at(c, j) /= double(counts[c]);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        if (counts[c] > 0) continue;
        std::size_t best = n_chunks;
        std::size_t best_dist = n_chunks + 1;
        for (std::size_t d = 0; d < n_chunks; ++d) {
            if (counts[d] == 0) continue;
            const std::size_t dist = d > c ? d - c : c - d;
            if (dist < best_dist) {
                best_dist = dist;
                best = d;
            }
        }
        std::copy_n(out.row_ptr(best), m.cols, out.row_ptr(c));
    }
    return out;
}

inline Mat chunk_mfcc(const Mat& coeffs, std::size_t n_chunks) { return chunk_matrix(coeffs, n_chunks); }

}  // namespace trailrate
