#pragma once

// HTTP speech backends.
//
// TTS:     POST <SGT_TTS_URL> with {"text": ...}; the response body is a
//          16-bit PCM mono WAV.
// Aligner: POST <SGT_ALIGNER_URL> as multipart form data with fields
//          "audio" (WAV) and "text"; the response is a JSON array of
//          {"word", "start", "end"}.

#include <cstdlib>
#include <memory>
#include <string>

#include "sgt/speech.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen parameter names.
#include <httplib.h>

namespace sgt {

struct HttpEndpoint {
    std::string origin; // scheme://host[:port]
    std::string path;

    static HttpEndpoint parse(const std::string& url) {
        const auto scheme = url.find("://");
        if (scheme == std::string::npos) throw Error(ErrorCode::InvalidArgument, "URL needs a scheme: " + url);
        const auto slash = url.find('/', scheme + 3);
        if (slash == std::string::npos) return {url, "/"};
        return {url.substr(0, slash), url.substr(slash)};
    }
};

class HttpTts final : public TtsClient {
public:
    explicit HttpTts(std::string url, int timeout_seconds = 30)
        : endpoint_(HttpEndpoint::parse(url)), url_(std::move(url)), timeout_(timeout_seconds) {}

    SynthesizedSpeech synthesize(const std::string& text) const override {
        if (tokenize(text).empty()) throw Error(ErrorCode::InvalidArgument, "text has no words");
        httplib::Client cli(endpoint_.origin);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        const auto res = cli.Post(endpoint_.path, nlohmann::json{{"text", text}}.dump(), "application/json");
        if (!res) {
            throw Error(ErrorCode::TtsUnavailable, "TTS backend " + url_ + " unreachable: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::TtsUnavailable, "TTS backend " + url_ + " returned HTTP " + std::to_string(res->status));
        }
        SynthesizedSpeech out;
        try {
            out.wave = decode_wav(res->body);
        } catch (const Error& e) {
            throw Error(ErrorCode::TtsUnavailable, std::string("TTS backend returned unusable audio: ") + e.what());
        }
        return out;
    }

    std::string name() const override { return "http:" + url_; }

private:
    HttpEndpoint endpoint_;
    std::string url_;
    int timeout_;
};

class HttpAligner final : public Aligner {
public:
    explicit HttpAligner(std::string url, int timeout_seconds = 30)
        : endpoint_(HttpEndpoint::parse(url)), url_(std::move(url)), timeout_(timeout_seconds) {}

    std::vector<WordTiming> align(const Waveform& wave, const std::string& text) const override {
        httplib::Client cli(endpoint_.origin);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        const httplib::MultipartFormDataItems items{{"audio", encode_wav(wave), "speech.wav", "audio/wav"},
                                                    {"text", text, "", "text/plain"}};
        const auto res = cli.Post(endpoint_.path, items);
        if (!res) {
            throw Error(ErrorCode::AlignerUnavailable,
                        "aligner " + url_ + " unreachable: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::AlignerUnavailable, "aligner " + url_ + " returned HTTP " + std::to_string(res->status));
        }
        try {
            auto timings = timings_from_json(nlohmann::json::parse(res->body));
            validate_timings(timings);
            return timings;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::AlignerUnavailable, std::string("aligner returned unusable timings: ") + e.what());
        }
    }

private:
    HttpEndpoint endpoint_;
    std::string url_;
    int timeout_;
};

inline std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

// SGT_TTS_URL unset or empty selects the built-in fallback voice.
inline std::shared_ptr<const TtsClient> tts_from_env() {
    const auto url = env_or_empty("SGT_TTS_URL");
    if (url.empty()) return std::make_shared<FallbackTts>();
    return std::make_shared<HttpTts>(url);
}

// SGT_ALIGNER_URL unset or empty selects uniform timing.
inline std::shared_ptr<const Aligner> aligner_from_env() {
    const auto url = env_or_empty("SGT_ALIGNER_URL");
    if (url.empty()) return std::make_shared<UniformAligner>();
    return std::make_shared<HttpAligner>(url);
}

// Synthesizes speech and, when the TTS backend gives no timings, aligns it.
inline SynthesizedSpeech synthesize_speech(const std::string& text, const TtsClient& tts, const Aligner& aligner) {
    auto out = tts.synthesize(text);
    if (out.wave.samples.empty()) throw Error(ErrorCode::EmptyAudio, "TTS produced no audio");
    if (out.timings.empty()) out.timings = aligner.align(out.wave, text);
    return out;
}

} // namespace sgt
