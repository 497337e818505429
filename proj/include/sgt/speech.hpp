#pragma once

// Frame-aligned speech features: log-mel audio rows and word indices, plus
// the deterministic synthetic speech used when no TTS backend is configured.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>
#include <nlohmann/json.hpp>

#include "sgt/error.hpp"
#include "sgt/skeleton.hpp"

namespace sgt {

inline constexpr int kDefaultSampleRate = 16000;

struct WordTiming {
    std::string word;
    double start = 0.0;
    double end = 0.0;
    bool operator==(const WordTiming&) const = default;
};

inline nlohmann::json timings_to_json(std::span<const WordTiming> timings) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : timings) out.push_back({{"word", t.word}, {"start", t.start}, {"end", t.end}});
    return out;
}

inline std::vector<WordTiming> timings_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::SchemaViolation, "timings must be an array");
    std::vector<WordTiming> out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("word") || !e.contains("start") || !e.contains("end") ||
            !e["word"].is_string() || !e["start"].is_number() || !e["end"].is_number()) {
            throw Error(ErrorCode::SchemaViolation, "timing needs word, start and end");
        }
        out.push_back({e["word"].get<std::string>(), e["start"].get<double>(), e["end"].get<double>()});
    }
    return out;
}

inline void validate_timings(std::span<const WordTiming> timings) {
    double prev_end = 0.0;
    for (const auto& t : timings) {
        if (!(t.start >= 0.0 && t.start < t.end)) {
            throw Error(ErrorCode::InvalidArgument, "word timing needs 0 <= start < end");
        }
        if (t.start < prev_end - 1e-9) throw Error(ErrorCode::InvalidArgument, "word timings overlap");
        prev_end = t.end;
    }
}

// Lower-cased alphanumeric tokens (apostrophes kept).
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Token -> index map. Index 0 is reserved for padding and unknown words.
class Dictionary {
public:
    Dictionary() = default;

    // Indices are assigned in sorted token order so the result does not
    // depend on corpus order.
    static Dictionary build(std::span<const std::string> texts) {
        std::vector<std::string> words;
        for (const auto& text : texts) {
            for (auto& w : tokenize(text)) words.push_back(std::move(w));
        }
        return from_words(std::move(words));
    }

    static Dictionary from_words(std::vector<std::string> words) {
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        Dictionary d;
        d.words_ = std::move(words);
        for (std::size_t i = 0; i < d.words_.size(); ++i) d.index_[d.words_[i]] = static_cast<int>(i + 1);
        return d;
    }

    int index(std::string_view word) const {
        const auto tokens = tokenize(word);
        if (tokens.size() != 1) return 0;
        const auto it = index_.find(tokens.front());
        return it == index_.end() ? 0 : it->second;
    }

    const std::string& word(int index) const { return words_.at(index - 1); }
    int size() const noexcept { return static_cast<int>(words_.size()) + 1; }
    const std::vector<std::string>& words() const noexcept { return words_; }

    nlohmann::json to_json() const { return words_; }
    static Dictionary from_json(const nlohmann::json& j) {
        if (!j.is_array()) throw Error(ErrorCode::SchemaViolation, "dictionary must be an array");
        return from_words(j.get<std::vector<std::string>>());
    }

    bool operator==(const Dictionary& o) const { return words_ == o.words_; }

private:
    std::vector<std::string> words_;
    std::map<std::string, int, std::less<>> index_;
};

// ---------------------------------------------------------------------------
// WAV (16-bit PCM mono)

struct Waveform {
    std::vector<float> samples;
    int sample_rate = kDefaultSampleRate;

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    bool operator==(const Waveform&) const = default;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline std::uint32_t get_u32(std::string_view s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
    return v;
}
inline std::uint16_t get_u16(std::string_view s, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                      (static_cast<unsigned char>(s[at + 1]) << 8));
}

} // namespace detail

// Value a sample takes after a 16-bit PCM round trip.
inline float quantize_pcm16(float s) {
    return static_cast<float>(std::lround(std::clamp(s, -1.0f, 1.0f) * 32767.0f)) / 32767.0f;
}

inline std::string encode_wav(const Waveform& wave) {
    std::string out;
    const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
    out.append("RIFF");
    detail::put_u32(out, 36 + data_bytes);
    out.append("WAVEfmt ");
    detail::put_u32(out, 16);
    detail::put_u16(out, 1);
    detail::put_u16(out, 1);
    detail::put_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(wave.sample_rate * 2));
    detail::put_u16(out, 2);
    detail::put_u16(out, 16);
    out.append("data");
    detail::put_u32(out, data_bytes);
    for (float s : wave.samples) {
        const float c = std::clamp(s, -1.0f, 1.0f);
        const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0f));
        detail::put_u16(out, static_cast<std::uint16_t>(v));
    }
    return out;
}

inline Waveform decode_wav(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
        throw Error(ErrorCode::InvalidArgument, "not a RIFF/WAVE file");
    }
    Waveform wave;
    int channels = 0, bits = 0;
    bool have_fmt = false;
    std::size_t at = 12;
    while (at + 8 <= bytes.size()) {
        const auto id = bytes.substr(at, 4);
        const std::uint32_t len = detail::get_u32(bytes, at + 4);
        const std::size_t body = at + 8;
        if (body + len > bytes.size()) throw Error(ErrorCode::InvalidArgument, "truncated WAV chunk");
        if (id == "fmt ") {
            if (len < 16) throw Error(ErrorCode::InvalidArgument, "short fmt chunk");
            if (detail::get_u16(bytes, body) != 1) throw Error(ErrorCode::InvalidArgument, "WAV must be PCM");
            channels = detail::get_u16(bytes, body + 2);
            wave.sample_rate = static_cast<int>(detail::get_u32(bytes, body + 4));
            bits = detail::get_u16(bytes, body + 14);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw Error(ErrorCode::InvalidArgument, "data chunk before fmt");
            if (bits != 16 || channels != 1) throw Error(ErrorCode::InvalidArgument, "WAV must be 16-bit mono");
            const std::size_t n = len / 2;
            wave.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto v = static_cast<std::int16_t>(detail::get_u16(bytes, body + 2 * i));
                wave.samples[i] = static_cast<float>(v) / 32767.0f;
            }
            return wave;
        }
        at = body + len + (len & 1);
    }
    throw Error(ErrorCode::InvalidArgument, "WAV has no data chunk");
}

inline Waveform read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

inline void write_wav(const std::filesystem::path& path, const Waveform& wave) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    const auto bytes = encode_wav(wave);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// Audio features

struct AudioFeatureConfig {
    int n_mels = 26;
    int n_fft = 1024;
    double log_floor = 1e-10;
    double fps = kFps;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters evenly spaced on the mel scale between 0 and Nyquist.
// Rows are filters, columns FFT bins 0..n_fft/2.
inline Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int sample_rate) {
    const int bins = n_fft / 2 + 1;
    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, bins);
    const double mel_hi = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(n_mels + 2);
    for (int m = 0; m < n_mels + 2; ++m) edges[m] = mel_to_hz(mel_hi * m / (n_mels + 1));
    for (int m = 0; m < n_mels; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (int k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / n_fft;
            if (f > lo && f < mid) fb(m, k) = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi) fb(m, k) = (hi - f) / (hi - mid);
        }
    }
    return fb;
}

inline std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    return w;
}

inline int frames_for_duration(double seconds, double fps = kFps) {
    return static_cast<int>(std::lround(seconds * fps));
}

// One log-mel row per pose frame. Frame i is centred on sample
// round(i * sample_rate / fps); samples outside the waveform read as zero.
// n_frames < 0 derives the count from the waveform duration.
inline Eigen::MatrixXd extract_audio_features(std::span<const float> samples, int sample_rate, int n_frames = -1,
                                              const AudioFeatureConfig& cfg = {}) {
    if (samples.empty()) throw Error(ErrorCode::EmptyAudio, "waveform has no samples");
    if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
    if (n_frames < 0) {
        n_frames = frames_for_duration(static_cast<double>(samples.size()) / sample_rate, cfg.fps);
    }
    const int n = cfg.n_fft;
    const int bins = n / 2 + 1;
    const auto window = hann_window(n);
    const Eigen::MatrixXd fb = mel_filterbank(cfg.n_mels, n, sample_rate);
    const double floor_log = std::log(cfg.log_floor);

    Eigen::FFT<double> fft;
    std::vector<double> segment(n);
    std::vector<std::complex<double>> spectrum;
    Eigen::VectorXd power(bins);
    Eigen::MatrixXd out(n_frames, cfg.n_mels);
    const auto total = static_cast<long>(samples.size());
    for (int i = 0; i < n_frames; ++i) {
        const long centre = std::lround(i * static_cast<double>(sample_rate) / cfg.fps);
        const long first = centre - n / 2;
        bool silent = true;
        for (int k = 0; k < n; ++k) {
            const long at = first + k;
            const double s = (at >= 0 && at < total) ? samples[at] : 0.0;
            segment[k] = s * window[k];
            silent = silent && s == 0.0;
        }
        if (silent) {
            out.row(i).setConstant(floor_log);
            continue;
        }
        fft.fwd(spectrum, segment);
        for (int k = 0; k < bins; ++k) power[k] = std::norm(spectrum[k]);
        const Eigen::VectorXd mel = fb * power;
        for (int m = 0; m < cfg.n_mels; ++m) out(i, m) = std::log(std::max(mel[m], cfg.log_floor));
    }
    return out;
}

// Frame i receives the index of the word whose [start, end) contains i/fps.
inline std::vector<int> align_words(std::span<const WordTiming> timings, const Dictionary& dict, int n_frames,
                                    double fps = kFps) {
    std::vector<int> out(std::max(0, n_frames), 0);
    for (int i = 0; i < n_frames; ++i) {
        const double t = i / fps;
        for (const auto& w : timings) {
            if (t >= w.start && t < w.end) {
                out[i] = dict.index(w.word);
                break;
            }
        }
    }
    return out;
}

struct SpeechContext {
    Eigen::MatrixXd audio_features; // n_frames x audio_dim
    std::vector<int> word_indices;  // n_frames
    int sample_rate = kDefaultSampleRate;
    std::string text;
    std::vector<WordTiming> timings;

    int n_frames() const noexcept { return static_cast<int>(word_indices.size()); }
    int audio_dim() const noexcept { return static_cast<int>(audio_features.cols()); }

    void validate(int dictionary_size) const {
        if (audio_features.rows() != static_cast<Eigen::Index>(word_indices.size())) {
            throw Error(ErrorCode::ShapeMismatch, "audio rows differ from word index count");
        }
        for (int idx : word_indices) {
            if (idx < 0 || idx >= dictionary_size) throw Error(ErrorCode::ShapeMismatch, "word index out of range");
        }
    }

    // Frames [begin, begin + length); frames past the end are padded with the
    // silence row and the padding word.
    SpeechContext window(int begin, int length, double silence_value) const {
        SpeechContext out;
        out.sample_rate = sample_rate;
        out.audio_features = Eigen::MatrixXd::Constant(length, audio_features.cols(), silence_value);
        out.word_indices.assign(length, 0);
        for (int i = 0; i < length; ++i) {
            const int src = begin + i;
            if (src < 0 || src >= n_frames()) continue;
            out.audio_features.row(i) = audio_features.row(src);
            out.word_indices[i] = word_indices[src];
        }
        return out;
    }
};

inline SpeechContext make_speech_context(const Waveform& wave, std::span<const WordTiming> timings,
                                         const Dictionary& dict, int n_frames = -1,
                                         const AudioFeatureConfig& cfg = {}) {
    SpeechContext ctx;
    ctx.audio_features = extract_audio_features(wave.samples, wave.sample_rate, n_frames, cfg);
    ctx.word_indices = align_words(timings, dict, static_cast<int>(ctx.audio_features.rows()), cfg.fps);
    ctx.sample_rate = wave.sample_rate;
    ctx.timings.assign(timings.begin(), timings.end());
    return ctx;
}

// ---------------------------------------------------------------------------
// Speech synthesis and alignment clients

struct SynthesizedSpeech {
    Waveform wave;
    std::vector<WordTiming> timings;
};

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class TtsClient {
public:
    virtual ~TtsClient() = default;
    // Returned timings may be empty; an Aligner fills them in.
    virtual SynthesizedSpeech synthesize(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

class Aligner {
public:
    virtual ~Aligner() = default;
    virtual std::vector<WordTiming> align(const Waveform& wave, const std::string& text) const = 0;
};

// Splits the waveform duration evenly across the tokens of the text.
class UniformAligner final : public Aligner {
public:
    std::vector<WordTiming> align(const Waveform& wave, const std::string& text) const override {
        const auto words = tokenize(text);
        std::vector<WordTiming> out;
        if (words.empty()) return out;
        const double step = wave.duration() / static_cast<double>(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) {
            out.push_back({words[i], step * static_cast<double>(i), step * static_cast<double>(i + 1)});
        }
        return out;
    }
};

// A word rendered as a pitched harmonic tone under a sine envelope. Pitch
// is a function of the word so the same word always sounds the same.
inline void render_word_tone(std::vector<float>& samples, int sample_rate, double start, double end,
                             std::string_view word, double level) {
    const std::uint64_t h = fnv1a(word);
    const double freq = 140.0 + static_cast<double>(h % 16) * 20.0;
    const auto s0 = static_cast<std::size_t>(std::lround(start * sample_rate));
    const auto s1 = std::min(samples.size(), static_cast<std::size_t>(std::lround(end * sample_rate)));
    if (s1 <= s0) return;
    const double n = static_cast<double>(s1 - s0);
    for (std::size_t k = s0; k < s1; ++k) {
        const double u = static_cast<double>(k - s0) / n;
        const double t = static_cast<double>(k - s0) / sample_rate;
        const double s =
            std::sin(2.0 * std::numbers::pi * freq * t) + 0.4 * std::sin(4.0 * std::numbers::pi * freq * t);
        samples[k] += static_cast<float>(level * std::sin(std::numbers::pi * u) * s / 1.4);
    }
}

// Deterministic stand-in for a TTS service: one fixed-length tone burst per
// word, pitch and level derived from a hash of the word.
class FallbackTts final : public TtsClient {
public:
    explicit FallbackTts(double seconds_per_word = 0.4, int sample_rate = kDefaultSampleRate)
        : seconds_per_word_(seconds_per_word), sample_rate_(sample_rate) {}

    SynthesizedSpeech synthesize(const std::string& text) const override {
        const auto words = tokenize(text);
        if (words.empty()) throw Error(ErrorCode::InvalidArgument, "text has no words");
        SynthesizedSpeech out;
        out.wave.sample_rate = sample_rate_;
        out.wave.samples.assign(
            static_cast<std::size_t>(std::lround(seconds_per_word_ * sample_rate_)) * words.size(), 0.0f);
        for (std::size_t w = 0; w < words.size(); ++w) {
            const double start = seconds_per_word_ * static_cast<double>(w);
            const double end = seconds_per_word_ * static_cast<double>(w + 1);
            const double level = 0.3 + 0.05 * static_cast<double>((fnv1a(words[w]) >> 8) % 10);
            render_word_tone(out.wave.samples, sample_rate_, start, end, words[w], level);
            out.timings.push_back({words[w], start, end});
        }
        return out;
    }

    std::string name() const override { return "fallback"; }

private:
    double seconds_per_word_;
    int sample_rate_;
};

} // namespace sgt
