#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "trailrate/dsp.hpp"
#include "trailrate/rng.hpp"

using namespace trailrate;

namespace {

constexpr double kPi = 3.14159265358979323846;

// O(n^2) direct DFT; the independent oracle for the FFT path.
std::vector<double> naive_dft_magnitude(std::span<const double> frame, std::size_t n_fft) {
    std::vector<double> mag(n_fft / 2 + 1);
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < frame.size(); ++t) {
            const double ang = -2.0 * kPi * double(t) * double(k) / double(n_fft);
            acc += frame[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        mag[k] = std::abs(acc);
    }
    return mag;
}

Signal tone(double hz, double seconds, int sr, double amp = 0.5) {
    Signal s;
    s.sample_rate = sr;
    s.samples.resize(static_cast<std::size_t>(seconds * sr));
    for (std::size_t t = 0; t < s.samples.size(); ++t) s.samples[t] = amp * std::sin(2.0 * kPi * hz * double(t) / sr);
    return s;
}

}  // namespace

TEST_CASE("frame_signal counts and preconditions") {
    DspConfig cfg;
    Signal s;
    s.samples.assign(400, 0.1);
    CHECK(frame_signal(s, cfg).rows == 1);

    s.samples.assign(16000, 0.1);
    CHECK(frame_signal(s, cfg).rows == 98);

    s.samples.assign(399, 0.1);
    CHECK_THROWS_AS(frame_signal(s, cfg), DataError);
}

TEST_CASE("frame count formula exact over random lengths") {
    DspConfig cfg;
    Rng rng(71);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = cfg.frame_len + rng.below(5 * 16000);
        Signal s;
        s.samples.assign(n, 0.0);
        s.samples[0] = 1.0;
        const std::size_t expect = (n - cfg.frame_len) / cfg.hop + 1;
        CHECK(frame_signal(s, cfg).rows == expect);
    }
}

TEST_CASE("dft of unit impulse is flat") {
    std::vector<double> frame(64, 0.0);
    frame[0] = 1.0;
    for (double m : dft_magnitude(frame, 64)) CHECK(m == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("dft of pure cosine concentrates at its bin") {
    const std::size_t n = 64;
    std::vector<double> frame(n);
    for (std::size_t t = 0; t < n; ++t) frame[t] = std::cos(2.0 * kPi * 4.0 * double(t) / double(n));
    auto mag = dft_magnitude(frame, n);
    CHECK(mag[4] == Catch::Approx(32.0).margin(1e-9));
    for (std::size_t k = 0; k <= n / 2; ++k)
        if (k != 4) CHECK(mag[k] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("fft matches naive dft oracle") {
    Rng rng(73);
    for (std::size_t n_fft : {std::size_t(64), std::size_t(128), std::size_t(256), std::size_t(512)}) {
        std::vector<double> frame(n_fft - rng.below(n_fft / 4));
        for (double& v : frame) v = rng.uniform(-1, 1);
        auto fast = dft_magnitude(frame, n_fft);
        auto slow = naive_dft_magnitude(frame, n_fft);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t k = 0; k < fast.size(); ++k) CHECK(fast[k] == Catch::Approx(slow[k]).margin(1e-9));
    }
}

TEST_CASE("parseval identity with one-sided folding") {
    Rng rng(79);
    const std::size_t n = 256;
    std::vector<double> frame(n);
    for (double& v : frame) v = rng.uniform(-1, 1);
    auto mag = dft_magnitude(frame, n);
    double time_energy = 0.0;
    for (double v : frame) time_energy += v * v;
    double freq_energy = mag[0] * mag[0] + mag[n / 2] * mag[n / 2];
    for (std::size_t k = 1; k < n / 2; ++k) freq_energy += 2.0 * mag[k] * mag[k];
    freq_energy /= double(n);
    CHECK(freq_energy == Catch::Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("mel scale values and monotonicity") {
    CHECK(hz_to_mel(0.0) == 0.0);
    CHECK(hz_to_mel(700.0) == Catch::Approx(2595.0 * std::log10(2.0)));
    CHECK(hz_to_mel(700.0) == Catch::Approx(781.17).margin(0.01));
    CHECK(hz_to_mel(1000.0) == Catch::Approx(999.99).margin(0.05));
    CHECK_THROWS_AS(hz_to_mel(-1.0), ConfigError);

    Rng rng(83);
    double prev_f = 0.0, prev_m = hz_to_mel(0.0);
    for (int i = 0; i < 100; ++i) {
        const double f = prev_f + rng.uniform(0.01, 200.0);
        const double m = hz_to_mel(f);
        CHECK(m > prev_m);
        prev_f = f;
        prev_m = m;
    }
}

TEST_CASE("mel filterbank structure") {
    DspConfig cfg;
    const Mat fb = mel_filterbank(cfg, 16000);
    REQUIRE(fb.rows == cfg.n_mels);
    REQUIRE(fb.cols == cfg.n_fft / 2 + 1);
    for (std::size_t m = 0; m < fb.rows; ++m) {
        double best = 0.0;
        for (std::size_t k = 0; k < fb.cols; ++k) {
            CHECK(fb.at(m, k) >= 0.0);
            best = std::max(best, fb.at(m, k));
        }
        CHECK(best == 1.0);
    }
}

TEST_CASE("two-filter bank matches direct construction") {
    DspConfig cfg;
    cfg.n_mels = 2;
    cfg.n_fft = 64;
    cfg.frame_len = 64;
    cfg.hop = 32;
    cfg.n_coeffs = 2;
    const int sr = 16000;
    const Mat fb = mel_filterbank(cfg, sr);

    // Independent construction straight from the construction rule.
    const double mel_hi = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
    std::size_t bin[4];
    for (int j = 0; j < 4; ++j) {
        const double hz = 700.0 * (std::pow(10.0, (mel_hi * j / 3.0) / 2595.0) - 1.0);
        bin[j] = static_cast<std::size_t>(std::floor(65.0 * hz / sr));
    }
    Mat expect(2, 33);
    for (std::size_t m = 0; m < 2; ++m) {
        expect.at(m, bin[m + 1]) = 1.0;
        for (std::size_t k = bin[m] + 1; k < bin[m + 1]; ++k)
            expect.at(m, k) = double(k - bin[m]) / double(bin[m + 1] - bin[m]);
        for (std::size_t k = bin[m + 1] + 1; k < bin[m + 2]; ++k)
            expect.at(m, k) = double(bin[m + 2] - k) / double(bin[m + 2] - bin[m + 1]);
    }
    REQUIRE(fb.rows == expect.rows);
    REQUIRE(fb.cols == expect.cols);
    for (std::size_t i = 0; i < fb.data.size(); ++i) CHECK(fb.data[i] == Catch::Approx(expect.data[i]).margin(1e-12));
}

TEST_CASE("overdense filterbank reports the empty filter") {
    DspConfig cfg;
    cfg.n_mels = 128;
    cfg.n_coeffs = 13;
    CHECK_THROWS_WITH(mel_filterbank(cfg, 16000), Catch::Matchers::ContainsSubstring("filter"));
}

TEST_CASE("log mel of silence hits the floor everywhere") {
    DspConfig cfg;
    Signal s;
    s.samples.assign(1600, 0.0);
    const Mat lm = log_mel_spectrogram(s, cfg);
    CHECK(lm.rows == frame_signal(s, cfg).rows);
    CHECK(lm.cols == cfg.n_mels);
    for (double v : lm.data) CHECK(v == Catch::Approx(std::log(cfg.log_floor)));
}

TEST_CASE("440 Hz tone peaks at the filter nearest 440") {
    DspConfig cfg;
    const int sr = 16000;
    const Signal s = tone(440.0, 0.5, sr);
    const Mat lm = log_mel_spectrogram(s, cfg);

    // Quantized center frequency of each filter, from the construction rule.
    const double mel_hi = hz_to_mel(cfg.fmax);
    std::size_t expect = 0;
    double best_dist = 1e18;
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double mel = mel_hi * double(m + 1) / double(cfg.n_mels + 1);
        const double hz = mel_to_hz(mel);
        const double bin = std::floor((double(cfg.n_fft) + 1.0) * hz / sr);
        const double center_hz = bin * sr / double(cfg.n_fft);
        const double dist = std::abs(center_hz - 440.0);
        if (dist < best_dist) {
            best_dist = dist;
            expect = m;
        }
    }
    for (std::size_t f = 0; f < lm.rows; ++f) {
        std::size_t arg = 0;
        for (std::size_t m = 1; m < lm.cols; ++m)
            if (lm.at(f, m) > lm.at(f, arg)) arg = m;
        CHECK(arg == expect);
    }
}

TEST_CASE("mfcc of silence is the dct of a constant") {
    DspConfig cfg;
    Signal s;
    s.samples.assign(800, 0.0);
    const Mat c = mfcc(s, cfg);
    CHECK(c.rows == frame_signal(s, cfg).rows);
    CHECK(c.cols == cfg.n_coeffs);
    const double expect0 = std::sqrt(double(cfg.n_mels)) * std::log(cfg.log_floor);
    for (std::size_t f = 0; f < c.rows; ++f) {
        CHECK(c.at(f, 0) == Catch::Approx(expect0));
        for (std::size_t j = 1; j < c.cols; ++j) CHECK(c.at(f, j) == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("full dct inverts the log mel rows") {
    DspConfig cfg;
    cfg.n_coeffs = cfg.n_mels;  // keep the full transform
    Rng rng(89);
    Signal s;
    s.sample_rate = 16000;
    s.samples.resize(2400);
    for (double& v : s.samples) v = rng.uniform(-0.8, 0.8);
    const Mat lm = log_mel_spectrogram(s, cfg);
    const Mat c = mfcc(s, cfg);
    const std::size_t M = cfg.n_mels;
    for (std::size_t f = 0; f < lm.rows; ++f) {
        for (std::size_t m = 0; m < M; ++m) {
            // Orthonormal DCT-III reconstruction.
            double acc = c.at(f, 0) * std::sqrt(1.0 / double(M));
            for (std::size_t j = 1; j < M; ++j)
                acc += c.at(f, j) * std::sqrt(2.0 / double(M)) *
                       std::cos(kPi * double(j) * (2.0 * double(m) + 1.0) / (2.0 * double(M)));
            CHECK(acc == Catch::Approx(lm.at(f, m)).margin(1e-9));
        }
    }
}

TEST_CASE("chunking partitions and averages") {
    Mat m(100, 3);
    Rng rng(97);
    for (double& v : m.data) v = rng.uniform(-1, 1);
    const Mat c = chunk_mfcc(m, 10);
    REQUIRE(c.rows == 10);
    for (std::size_t chunk = 0; chunk < 10; ++chunk)
        for (std::size_t j = 0; j < 3; ++j) {
            double mean = 0.0;
            for (std::size_t t = chunk * 10; t < (chunk + 1) * 10; ++t) mean += m.at(t, j);
            mean /= 10.0;
            CHECK(c.at(chunk, j) == Catch::Approx(mean));
        }

    const Mat ident = chunk_mfcc(m, 100);
    CHECK(ident.data == m.data);

    Mat empty;
    CHECK_THROWS_AS(chunk_mfcc(empty, 4), DataError);
}

TEST_CASE("size-weighted chunk means equal the global mean") {
    Rng rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t F = 1 + rng.below(300);
        const std::size_t n = 1 + rng.below(12);
        Mat m(F, 2);
        for (double& v : m.data) v = rng.uniform(-2, 2);
        const Mat c = chunk_mfcc(m, n);
        REQUIRE(c.rows == n);
        if (F < n) continue;  // empty chunks possible below this point
        std::vector<std::size_t> counts(n, 0);
        for (std::size_t t = 0; t < F; ++t) ++counts[t * n / F];
        for (std::size_t j = 0; j < 2; ++j) {
            double global = 0.0;
            for (std::size_t t = 0; t < F; ++t) global += m.at(t, j);
            global /= double(F);
            double weighted = 0.0;
            for (std::size_t chunk = 0; chunk < n; ++chunk) weighted += double(counts[chunk]) * c.at(chunk, j);
            weighted /= double(F);
            CHECK(weighted == Catch::Approx(global).margin(1e-9));
        }
    }
}

TEST_CASE("empty chunks copy the nearest filled chunk") {
    Mat m(3, 1);
    m.at(0, 0) = 1.0;
    m.at(1, 0) = 2.0;
    m.at(2, 0) = 3.0;
    // F=3, n=5: frames land in chunks 0, 1, 3; chunks 2 and 4 are empty.
    const Mat c = chunk_mfcc(m, 5);
    CHECK(c.at(0, 0) == 1.0);
    CHECK(c.at(1, 0) == 2.0);
    CHECK(c.at(3, 0) == 3.0);
    CHECK(c.at(2, 0) == 2.0);  // tie between chunks 1 and 3 -> lower index
    CHECK(c.at(4, 0) == 3.0);
}

TEST_CASE("mfcc pipeline is deterministic") {
    DspConfig cfg;
    Rng rng(103);
    Signal s;
    s.samples.resize(4000);
    for (double& v : s.samples) v = rng.uniform(-1, 1);
    const Mat a = mfcc(s, cfg);
    const Mat b = mfcc(s, cfg);
    CHECK(a.data == b.data);
    CHECK(chunk_mfcc(a, 10).data == chunk_mfcc(b, 10).data);
}
