#pragma once

// REST service under /api: speech synthesis, generation (model or
// keyframe), projects with undo/redo history, and the motion library.
//
// Projects persist to <data_dir>/projects.jsonl, an append-only log of
// {"op":"put","project":{...}} and {"op":"delete","id":...} records written
// by a single writer thread and compacted on open. Synthesized audio is
// cached under <data_dir>/audio.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "sgt/checkpoint.hpp"
#include "sgt/controls.hpp"
#include "sgt/genmodel.hpp"
#include "sgt/keyframe.hpp"
#include "sgt/metrics.hpp"
#include "sgt/motion_json.hpp"
#include "sgt/motionlib.hpp"
#include "sgt/speech_http.hpp"
#include "sgt/synthesis.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen parameter names.
#include <httplib.h>

namespace sgt {

// ---------------------------------------------------------------------------
// Projects

struct Project {
    std::string id;
    std::string name;
    std::string text;
    std::string audio_id;
    json controls = json::object();
    json motion = nullptr;
    std::vector<json> undo;
    std::vector<json> redo;
    std::string created_at;
    std::string updated_at;

    // Client view: history stacks are summarized by depth.
    json view() const {
        return {{"id", id},
                {"name", name},
                {"text", text},
                {"audio_id", audio_id},
                {"controls", controls},
                {"motion", motion},
                {"undo_depth", undo.size()},
                {"redo_depth", redo.size()},
                {"created_at", created_at},
                {"updated_at", updated_at}};
    }

    json record() const {
        json j = view();
        j.erase("undo_depth");
        j.erase("redo_depth");
        j["history"] = {{"undo", undo}, {"redo", redo}};
        return j;
    }

    static Project from_record(const json& j) {
        Project p;
        p.id = j.at("id");
        p.name = j.at("name");
        p.text = j.at("text");
        p.audio_id = j.at("audio_id");
        p.controls = j.at("controls");
        p.motion = j.at("motion");
        p.undo = j.at("history").at("undo").get<std::vector<json>>();
        p.redo = j.at("history").at("redo").get<std::vector<json>>();
        p.created_at = j.at("created_at");
        p.updated_at = j.at("updated_at");
        return p;
    }
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

// Append-only JSON-lines log drained by one writer thread.
class JsonlWriter {
public:
    explicit JsonlWriter(std::filesystem::path path) : path_(std::move(path)), thread_([this] { run(); }) {}
    ~JsonlWriter() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        thread_.join();
    }
    JsonlWriter(const JsonlWriter&) = delete;
    JsonlWriter& operator=(const JsonlWriter&) = delete;

    void append(std::string line) {
        {
            std::lock_guard lock(mu_);
            queue_.push_back(std::move(line));
            ++enqueued_;
        }
        cv_.notify_all();
    }

    // Blocks until everything appended so far is on disk.
    void sync() {
        std::unique_lock lock(mu_);
        const auto target = enqueued_;
        done_cv_.wait(lock, [&] { return written_ >= target; });
        if (!error_.empty()) throw Error(ErrorCode::Io, error_);
    }

private:
    void run() {
        std::unique_lock lock(mu_);
        while (true) {
            cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
            if (queue_.empty() && stop_) return;
            std::deque<std::string> batch;
            batch.swap(queue_);
            lock.unlock();
            std::string err;
            {
                std::ofstream out(path_, std::ios::app | std::ios::binary);
                for (const auto& l : batch) out << l << '\n';
                out.flush();
                if (!out) err = "cannot append to " + path_.string();
            }
            lock.lock();
            if (!err.empty()) error_ = err;
            written_ += batch.size();
            done_cv_.notify_all();
        }
    }

    std::filesystem::path path_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    std::deque<std::string> queue_;
    std::size_t enqueued_ = 0, written_ = 0;
    bool stop_ = false;
    std::string error_;
    std::thread thread_;
};

class ProjectStore {
public:
    ProjectStore(const std::filesystem::path& dir, std::size_t history_depth = 100)
        : path_(dir / "projects.jsonl"), depth_(history_depth) {
        std::filesystem::create_directories(dir);
        load_and_compact();
        writer_ = std::make_unique<JsonlWriter>(path_);
    }

    std::vector<Project> list() const {
        std::lock_guard lock(mu_);
        std::vector<Project> out;
        for (const auto& [id, p] : projects_) out.push_back(p);
        return out;
    }

    std::optional<Project> get(const std::string& id) const {
        std::lock_guard lock(mu_);
        const auto it = projects_.find(id);
        if (it == projects_.end()) return std::nullopt;
        return it->second;
    }

    Project create(Project p) {
        std::lock_guard lock(mu_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "prj-%06llu", static_cast<unsigned long long>(++counter_));
        p.id = buf;
        p.created_at = p.updated_at = utc_timestamp();
        p.undo.clear();
        p.redo.clear();
        projects_[p.id] = p;
        persist(p);
        return p;
    }

    // Applies `edit` to the stored project. A change of controls pushes the
    // previous controls onto the undo stack and clears redo.
    template <class Fn>
    std::optional<Project> update(const std::string& id, Fn&& edit) {
        std::lock_guard lock(mu_);
        const auto it = projects_.find(id);
        if (it == projects_.end()) return std::nullopt;
        Project next = it->second;
        edit(next);
        if (next.controls != it->second.controls) {
            next.undo.push_back(it->second.controls);
            if (next.undo.size() > depth_) next.undo.erase(next.undo.begin());
            next.redo.clear();
        }
        next.id = id;
        next.created_at = it->second.created_at;
        next.updated_at = utc_timestamp();
        it->second = next;
        persist(next);
        return next;
    }

    enum class Step { Undo, Redo };
    struct StepResult {
        std::optional<Project> project;
        bool moved = false;
    };

    StepResult step(const std::string& id, Step dir) {
        std::lock_guard lock(mu_);
        const auto it = projects_.find(id);
        if (it == projects_.end()) return {};
        Project& p = it->second;
        auto& from = dir == Step::Undo ? p.undo : p.redo;
        auto& to = dir == Step::Undo ? p.redo : p.undo;
        if (from.empty()) return {p, false};
        to.push_back(p.controls);
        if (to.size() > depth_) to.erase(to.begin());
        p.controls = from.back();
        from.pop_back();
        p.updated_at = utc_timestamp();
        persist(p);
        return {p, true};
    }

    bool remove(const std::string& id) {
        std::lock_guard lock(mu_);
        if (projects_.erase(id) == 0) return false;
        writer_->append(json{{"op", "delete"}, {"id", id}}.dump());
        return true;
    }

    void sync() { writer_->sync(); }
    std::size_t history_depth() const { return depth_; }

private:
    void persist(const Project& p) { writer_->append(json{{"op", "put"}, {"project", p.record()}}.dump()); }

    void load_and_compact() {
        if (!std::filesystem::exists(path_)) return;
        std::ifstream in(path_, std::ios::binary);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception&) {
                // A torn final line from an interrupted write is dropped.
                if (in.peek() == std::char_traits<char>::eof()) break;
                throw Error(ErrorCode::SchemaViolation, path_.string() + ": bad record on line " + std::to_string(n));
            }
            try {
                if (rec.at("op") == "put") {
                    auto p = Project::from_record(rec.at("project"));
                    projects_[p.id] = std::move(p);
                } else if (rec.at("op") == "delete") {
                    projects_.erase(rec.at("id").get<std::string>());
                }
            } catch (const json::exception& e) {
                throw Error(ErrorCode::SchemaViolation, path_.string() + ": " + e.what());
            }
        }
        for (const auto& [id, p] : projects_) {
            unsigned long long k = 0;
            if (std::sscanf(id.c_str(), "prj-%llu", &k) == 1) counter_ = std::max<std::uint64_t>(counter_, k);
        }
        std::string compact;
        for (const auto& [id, p] : projects_) compact += json{{"op", "put"}, {"project", p.record()}}.dump() + "\n";
        const auto tmp = std::filesystem::path(path_.string() + ".tmp");
        write_text_file(tmp, compact);
        std::filesystem::rename(tmp, path_);
    }

    std::filesystem::path path_;
    std::size_t depth_;
    mutable std::mutex mu_;
    std::map<std::string, Project> projects_;
    std::uint64_t counter_ = 0;
    std::unique_ptr<JsonlWriter> writer_;
};

// ---------------------------------------------------------------------------
// Service

struct ServiceConfig {
    std::filesystem::path data_dir = "sgt-data";
    std::optional<std::filesystem::path> static_dir;
    std::size_t history_depth = 100;
    SynthesisConfig synthesis;
};

struct AudioEntry {
    std::string id;
    std::string text;
    Waveform wave;
    std::vector<WordTiming> timings;
    int n_frames = 0;
};

// Farthest frame referenced by a controls document; lets the schema be
// checked when the timeline length is not known.
inline int controls_extent(const json& j) {
    int extent = 1;
    if (!j.is_object()) return extent;
    if (j.contains("pose_controls") && j["pose_controls"].is_array()) {
        for (const auto& e : j["pose_controls"]) {
            if (e.is_object() && e.contains("start") && e["start"].is_number_integer() && e.contains("frames") &&
                e["frames"].is_array()) {
                extent = std::max(extent, e["start"].get<int>() + static_cast<int>(e["frames"].size()));
            }
        }
    }
    if (j.contains("style_controls") && j["style_controls"].is_array()) {
        for (const auto& e : j["style_controls"]) {
            if (e.is_object() && e.contains("end") && e["end"].is_number_integer()) {
                extent = std::max(extent, e["end"].get<int>());
            }
        }
    }
    return extent;
}

class Service {
public:
    Service(ServiceConfig cfg, std::shared_ptr<const GeneratorModel> model,
            std::shared_ptr<const TtsClient> tts = std::make_shared<FallbackTts>(),
            std::shared_ptr<const Aligner> aligner = std::make_shared<UniformAligner>(),
            MotionLibrary library = MotionLibrary::builtin())
        : cfg_(std::move(cfg)),
          model_(std::move(model)),
          tts_(std::move(tts)),
          aligner_(std::move(aligner)),
          library_(std::move(library)),
          store_(cfg_.data_dir, cfg_.history_depth) {
        std::filesystem::create_directories(cfg_.data_dir / "audio");
        routes();
    }

    httplib::Server& server() { return server_; }
    ProjectStore& store() { return store_; }
    MotionLibrary& library() { return library_; }

    int bind_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
    bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }

    // Handlers, usable without a socket.
    json speech(const json& body);
    json generate(const json& body) const;
    json library_list(const std::string& tag) const;
    json library_item(const std::string& id, const std::string& speed, const std::string& flip) const;

private:
    class HttpError : public std::runtime_error {
    public:
        HttpError(int status, std::string code, const std::string& msg)
            : std::runtime_error(msg), status(status), code(std::move(code)) {}
        int status;
        std::string code;
    };

    static int status_for(ErrorCode c) {
        switch (c) {
        case ErrorCode::SchemaViolation:
        case ErrorCode::InvalidSpeedLevel:
        case ErrorCode::DuplicateKeyIndex:
        case ErrorCode::IndexOutOfRange:
        case ErrorCode::RangeOutOfBounds:
        case ErrorCode::LengthMismatch:
            return 422;
        case ErrorCode::UnknownGesture:
            return 404;
        case ErrorCode::ModelNotLoaded:
            return 409;
        case ErrorCode::TtsUnavailable:
        case ErrorCode::AlignerUnavailable:
            return 502;
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptyAudio:
            return 400;
        default:
            return 500;
        }
    }

    static void send_json(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
        send_json(res, status, {{"error", code}, {"message", msg}});
    }

    template <class Fn>
    static httplib::Server::Handler wrap(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const HttpError& e) {
                send_error(res, e.status, e.code, e.what());
            } catch (const Error& e) {
                send_error(res, status_for(e.code()), std::string(to_string(e.code())), e.what());
            } catch (const json::exception& e) {
                send_error(res, 400, "BadRequest", e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "Internal", e.what());
            }
        };
    }

    static json parse_body(const httplib::Request& req) {
        try {
            return json::parse(req.body);
        } catch (const json::exception& e) {
            throw HttpError(400, "BadRequest", std::string("request body is not JSON: ") + e.what());
        }
    }

    std::optional<AudioEntry> find_audio(const std::string& id) const;
    void routes();

    ServiceConfig cfg_;
    std::shared_ptr<const GeneratorModel> model_;
    std::shared_ptr<const TtsClient> tts_;
    std::shared_ptr<const Aligner> aligner_;
    MotionLibrary library_;
    ProjectStore store_;
    mutable std::mutex audio_mu_;
    mutable std::map<std::string, AudioEntry> audio_;
    httplib::Server server_;
};

inline json Service::speech(const json& body) {
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        throw HttpError(400, "BadRequest", "body must be {\"text\": string}");
    }
    const std::string text = body["text"];
    if (tokenize(text).empty()) throw HttpError(400, "BadRequest", "text is empty");
    char idbuf[17];
    std::snprintf(idbuf, sizeof idbuf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(text, fnv1a(tts_->name() + "\n"))));
    const std::string id = idbuf;
    auto cached = find_audio(id);
    if (!cached) {
        const auto speech = synthesize_speech(text, *tts_, *aligner_);
        AudioEntry e{id, text, speech.wave, speech.timings, frames_for_duration(speech.wave.duration())};
        write_wav(cfg_.data_dir / "audio" / (id + ".wav"), e.wave);
        write_text_file(cfg_.data_dir / "audio" / (id + ".json"),
                        json{{"text", text}, {"timings", timings_to_json(e.timings)}}.dump());
        std::lock_guard lock(audio_mu_);
        cached = audio_.emplace(id, std::move(e)).first->second;
    }
    return {{"audio_id", cached->id},
            {"text", cached->text},
            {"timings", timings_to_json(cached->timings)},
            {"n_frames", cached->n_frames},
            {"duration", cached->wave.duration()},
            {"sample_rate", cached->wave.sample_rate}};
}

inline std::optional<AudioEntry> Service::find_audio(const std::string& id) const {
    {
        std::lock_guard lock(audio_mu_);
        const auto it = audio_.find(id);
        if (it != audio_.end()) return it->second;
    }
    if (id.empty() || id.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
    const auto wav = cfg_.data_dir / "audio" / (id + ".wav");
    const auto meta = cfg_.data_dir / "audio" / (id + ".json");
    if (!std::filesystem::exists(wav) || !std::filesystem::exists(meta)) return std::nullopt;
    AudioEntry e;
    e.id = id;
    e.wave = read_wav(wav);
    const auto m = read_json_file(meta);
    e.text = m.at("text");
    e.timings = timings_from_json(m.at("timings"));
    e.n_frames = frames_for_duration(e.wave.duration());
    std::lock_guard lock(audio_mu_);
    return audio_.emplace(id, std::move(e)).first->second;
}

inline json Service::generate(const json& body) const {
    if (!body.is_object() || !body.contains("audio_id") || !body["audio_id"].is_string()) {
        throw HttpError(400, "BadRequest", "body must contain audio_id");
    }
    const std::string mode = body.value("mode", std::string("model"));
    if (mode != "model" && mode != "keyframe") throw HttpError(422, "SchemaViolation", "mode must be model or keyframe");
    const auto audio = find_audio(body["audio_id"]);
    if (!audio) throw HttpError(404, "NotFound", "unknown audio_id");
    const int n = audio->n_frames;
    const ControlSet controls = controls_from_json(body.value("controls", json::object()), n);

    const SkeletonSpec skel = model_ ? model_->skeleton : SkeletonSpec{};
    MotionSequence motion;
    if (mode == "model") {
        if (!model_) throw Error(ErrorCode::ModelNotLoaded, "no checkpoint is loaded");
        const auto ctx = make_speech_context(audio->wave, audio->timings, model_->dictionary, n);
        motion = generate_long(ctx, controls, model_.get(), skel, cfg_.synthesis);
    } else {
        const PoseFrame mean = model_ ? model_->mean_pose : body_pose(rest_body(), skel);
        std::vector<KeyPose> keys;
        for (int f = 0; f < n; ++f) {
            if (!controls.pose.mask[f]) continue;
            keys.push_back({f, to_pose(DirVecFrame::from_flat(controls.pose.poses[f], false), skel)});
        }
        if (n < 2) {
            motion.frames.assign(1, keys.empty() ? mean : keys.front().pose);
        } else {
            motion = interpolate(keys, n, mean);
        }
    }
    json style = json::array();
    if (motion.size() >= 2) {
        const auto raw = style_track(motion);
        for (const auto& s : raw) {
            const auto z = model_ ? normalize_style(s, model_->style_norm) : s;
            style.push_back({z.speed, z.space, z.handedness});
        }
    }
    return {{"mode", mode},
            {"audio_id", audio->id},
            {"n_frames", n},
            {"motion", motion_to_json(motion)},
            {"style", style},
            {"style_normalized", static_cast<bool>(model_)}};
}

inline json Service::library_list(const std::string& tag) const {
    json out = json::array();
    for (const auto& g : library_.list(tag)) out.push_back(gesture_info_to_json(g));
    return {{"gestures", out}};
}

inline json Service::library_item(const std::string& id, const std::string& speed_s, const std::string& flip_s) const {
    int speed = 1;
    if (!speed_s.empty()) {
        if (speed_s.size() != 1 || speed_s[0] < '1' || speed_s[0] > '3') {
            throw Error(ErrorCode::InvalidSpeedLevel, "speed must be 1, 2 or 3");
        }
        speed = speed_s[0] - '0';
    }
    bool flip = false;
    if (!flip_s.empty()) {
        if (flip_s == "true" || flip_s == "1") {
            flip = true;
        } else if (flip_s != "false" && flip_s != "0") {
            throw HttpError(422, "SchemaViolation", "flip must be true or false");
        }
    }
    const auto g = library_.get(id);
    return {{"id", g.id},       {"name", g.name},
            {"tags", g.tags},   {"anchor", g.anchor},
            {"speed", speed},   {"flip", flip},
            {"motion", motion_to_json(library_.instantiate(id, speed, flip))}};
}

inline void Service::routes() {
    auto& s = server_;
    s.Get("/api/health", wrap([this](const httplib::Request&, httplib::Response& res) {
              send_json(res, 200,
                        {{"status", "ok"},
                         {"model_loaded", static_cast<bool>(model_)},
                         {"tts", tts_->name()},
                         {"history_depth", store_.history_depth()}});
          }));

    s.Post("/api/speech", wrap([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, speech(parse_body(req)));
           }));

    s.Get(R"(/api/speech/([0-9a-f]+)/wav)", wrap([this](const httplib::Request& req, httplib::Response& res) {
              const auto audio = find_audio(req.matches[1]);
              if (!audio) throw HttpError(404, "NotFound", "unknown audio_id");
              res.set_content(encode_wav(audio->wave), "audio/wav");
          }));

    s.Post("/api/generate", wrap([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, generate(parse_body(req)));
           }));

    s.Get("/api/motion-library", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200, library_list(req.get_param_value("tag")));
          }));

    s.Get(R"(/api/motion-library/([A-Za-z0-9_\-]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200,
                        library_item(req.matches[1], req.get_param_value("speed"), req.get_param_value("flip")));
          }));

    // Projects.
    auto check_controls = [](const json& c) {
        controls_from_json(c, controls_extent(c));
    };
    auto apply_fields = [check_controls](Project& p, const json& body) {
        if (!body.is_object()) throw HttpError(400, "BadRequest", "project body must be an object");
        if (body.contains("name")) p.name = body["name"].get<std::string>();
        if (body.contains("text")) p.text = body["text"].get<std::string>();
        if (body.contains("audio_id")) p.audio_id = body["audio_id"].get<std::string>();
        if (body.contains("controls")) {
            check_controls(body["controls"]);
            p.controls = body["controls"];
        }
        if (body.contains("motion")) {
            if (!body["motion"].is_null()) motion_from_json(body["motion"]);
            p.motion = body["motion"];
        }
    };

    s.Get("/api/projects", wrap([this](const httplib::Request&, httplib::Response& res) {
              json list = json::array();
              for (const auto& p : store_.list()) {
                  list.push_back({{"id", p.id}, {"name", p.name}, {"updated_at", p.updated_at}});
              }
              send_json(res, 200, {{"projects", list}});
          }));

    s.Post("/api/projects", wrap([this, apply_fields](const httplib::Request& req, httplib::Response& res) {
               Project p;
               const json body = req.body.empty() ? json::object() : parse_body(req);
               apply_fields(p, body);
               send_json(res, 201, store_.create(std::move(p)).view());
           }));

    s.Get(R"(/api/projects/([A-Za-z0-9\-]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
              const auto p = store_.get(req.matches[1]);
              if (!p) throw HttpError(404, "NotFound", "unknown project");
              send_json(res, 200, p->view());
          }));

    s.Put(R"(/api/projects/([A-Za-z0-9\-]+))",
          wrap([this, apply_fields](const httplib::Request& req, httplib::Response& res) {
              const json body = parse_body(req);
              Project probe;
              apply_fields(probe, body);  // validate before touching the store
              const auto p = store_.update(req.matches[1], [&](Project& x) { apply_fields(x, body); });
              if (!p) throw HttpError(404, "NotFound", "unknown project");
              send_json(res, 200, p->view());
          }));

    s.Delete(R"(/api/projects/([A-Za-z0-9\-]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
                 if (!store_.remove(req.matches[1])) throw HttpError(404, "NotFound", "unknown project");
                 res.status = 204;
             }));

    auto history = [this](ProjectStore::Step dir) {
        return wrap([this, dir](const httplib::Request& req, httplib::Response& res) {
            const auto r = store_.step(req.matches[1], dir);
            if (!r.project) throw HttpError(404, "NotFound", "unknown project");
            if (!r.moved) {
                throw HttpError(409, "Conflict", dir == ProjectStore::Step::Undo ? "nothing to undo" : "nothing to redo");
            }
            send_json(res, 200,
                      {{"id", r.project->id},
                       {"controls", r.project->controls},
                       {"undo_depth", r.project->undo.size()},
                       {"redo_depth", r.project->redo.size()}});
        });
    };
    s.Post(R"(/api/projects/([A-Za-z0-9\-]+)/undo)", history(ProjectStore::Step::Undo));
    s.Post(R"(/api/projects/([A-Za-z0-9\-]+)/redo)", history(ProjectStore::Step::Redo));

    if (cfg_.static_dir) s.set_mount_point("/", cfg_.static_dir->string());
}

} // namespace sgt
