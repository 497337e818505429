#pragma once

// Motion interchange format:
//   { "fps": 15, "joints": ["nose", ...], "frames": [[[x,y,z] x 10], ...] }

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sgt/error.hpp"
#include "sgt/skeleton.hpp"

namespace sgt {

using nlohmann::json;

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::SchemaViolation, "expected [x,y,z]");
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
        if (!j[k].is_number()) throw Error(ErrorCode::SchemaViolation, "coordinate is not a number");
        v[k] = j[k].get<double>();
    }
    if (!v.allFinite()) throw Error(ErrorCode::SchemaViolation, "non-finite coordinate");
    return v;
}

inline json pose_to_json(const PoseFrame& p) {
    json rows = json::array();
    for (const auto& j : p.joints) rows.push_back(vec3_to_json(j));
    return rows;
}

inline PoseFrame pose_from_json(const json& rows) {
    if (!rows.is_array() || rows.size() != kNumJoints) {
        throw Error(ErrorCode::SchemaViolation, "pose frame needs 10 joint rows");
    }
    PoseFrame p;
    for (int j = 0; j < kNumJoints; ++j) p[j] = vec3_from_json(rows[j]);
    return p;
}

inline json dirvec_to_json(const DirVecFrame& d) {
    json rows = json::array();
    for (const auto& v : d.dirs) rows.push_back(vec3_to_json(v));
    return rows;
}

inline DirVecFrame dirvec_from_json(const json& rows) {
    if (!rows.is_array() || rows.size() != kNumBones) {
        throw Error(ErrorCode::SchemaViolation, "dir-vec frame needs 9 bone rows");
    }
    DirVecFrame d;
    for (int b = 0; b < kNumBones; ++b) {
        Vec3 v = vec3_from_json(rows[b]);
        const double n = v.norm();
        if (n < 1e-9) throw Error(ErrorCode::SchemaViolation, "zero-length direction vector");
        // Already-unit rows are kept bit-exact so tracks round-trip losslessly.
        d[b] = std::abs(n - 1.0) > 1e-12 ? Vec3(v / n) : v;
    }
    return d;
}

inline json motion_to_json(const MotionSequence& seq) {
    json names = json::array();
    for (auto n : kJointNames) names.push_back(std::string(n));
    json frames = json::array();
    for (const auto& f : seq.frames) frames.push_back(pose_to_json(f));
    return json{{"fps", seq.fps}, {"joints", names}, {"frames", frames}};
}

inline MotionSequence motion_from_json(const json& j) {
    if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array()) {
        throw Error(ErrorCode::SchemaViolation, "motion JSON needs a frames array");
    }
    MotionSequence seq;
    if (j.contains("fps")) {
        if (!j["fps"].is_number()) throw Error(ErrorCode::SchemaViolation, "fps must be a number");
        seq.fps = j["fps"].get<double>();
        if (seq.fps != kFps) throw Error(ErrorCode::SchemaViolation, "motion must be 15 fps");
    }
    if (j.contains("joints")) {
        const auto& names = j["joints"];
        if (!names.is_array() || names.size() != kNumJoints) {
            throw Error(ErrorCode::SchemaViolation, "joints must list 10 names");
        }
        for (int k = 0; k < kNumJoints; ++k) {
            if (!names[k].is_string() || names[k].get<std::string>() != kJointNames[k]) {
                throw Error(ErrorCode::SchemaViolation, "unexpected joint order");
            }
        }
    }
    seq.frames.reserve(j["frames"].size());
    for (const auto& f : j["frames"]) seq.frames.push_back(pose_from_json(f));
    return seq;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
}

inline MotionSequence load_motion(const std::filesystem::path& path) {
    return motion_from_json(read_json_file(path));
}

inline void save_motion(const std::filesystem::path& path, const MotionSequence& seq) {
    write_text_file(path, motion_to_json(seq).dump());
}

} // namespace sgt
