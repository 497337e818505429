#pragma once

// Model checkpoint file: 8-byte magic, u32 header length, JSON header,
// raw little-endian parameter blob. The header carries the configuration,
// dictionary, normalization statistics, skeleton, parameter table and a
// checksum over the blob.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

#include "sgt/genmodel.hpp"
#include "sgt/motion_json.hpp"

namespace sgt {

inline constexpr std::string_view kCheckpointMagic{"SGTCKPT\0", 8};
inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <class T>
constexpr const char* dtype_name() {
    return std::is_same_v<T, float> ? "f32" : "f64";
}

inline std::uint64_t fnv1a_bytes(std::string_view bytes) { return fnv1a(bytes); }

inline json style_norm_to_json(const StyleNormStats& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

inline StyleNormStats style_norm_from_json(const json& j) {
    StyleNormStats s;
    s.mean = j.at("mean").get<std::array<double, kStyleDim>>();
    s.stddev = j.at("stddev").get<std::array<double, kStyleDim>>();
    s.validate();
    return s;
}

} // namespace detail

template <class T>
std::string encode_checkpoint(const BasicGeneratorModel<T>& model) {
    const auto params = const_cast<BasicGeneratorModel<T>&>(model).all_params();
    std::string blob;
    json table = json::array();
    for (const auto* p : params) {
        table.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
        const auto bytes = static_cast<std::size_t>(p->value.size()) * sizeof(T);
        blob.append(reinterpret_cast<const char*>(p->value.data()), bytes);
    }
    json header = {{"format_version", kCheckpointVersion},
                   {"dtype", detail::dtype_name<T>()},
                   {"config", model.config.to_json()},
                   {"dictionary", model.dictionary.to_json()},
                   {"style_norm", detail::style_norm_to_json(model.style_norm)},
                   {"audio_norm", model.audio_norm.to_json()},
                   {"skeleton", model.skeleton.bone_lengths()},
                   {"mean_pose", pose_to_json(model.mean_pose)},
                   {"params", table},
                   {"blob_bytes", blob.size()},
                   {"checksum", detail::fnv1a_bytes(blob)}};
    header["extractor_config"] = model.extractor ? model.extractor->config().to_json() : json(nullptr);
    const std::string head = header.dump();
    std::string out(kCheckpointMagic);
    const auto len = static_cast<std::uint32_t>(head.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
    out += head;
    out += blob;
    return out;
}

template <class T>
BasicGeneratorModel<T> decode_checkpoint(std::string_view bytes) {
    auto corrupt = [](const std::string& why) { return Error(ErrorCode::CorruptCheckpoint, why); };
    if (bytes.size() < kCheckpointMagic.size() + 4 || bytes.substr(0, 8) != kCheckpointMagic) {
        throw corrupt("bad checkpoint magic");
    }
    const std::uint32_t len = detail::get_u32(bytes, 8);
    if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw corrupt("truncated checkpoint header");
    json header;
    try {
        header = json::parse(bytes.substr(12, len));
    } catch (const json::exception& e) {
        throw corrupt(std::string("unreadable checkpoint header: ") + e.what());
    }
    try {
        const int version = header.at("format_version");
        if (version != kCheckpointVersion) {
            throw Error(ErrorCode::VersionMismatch, "checkpoint format version " + std::to_string(version) +
                                                        " is not supported (expected " +
                                                        std::to_string(kCheckpointVersion) + ")");
        }
        if (header.at("dtype").get<std::string>() != detail::dtype_name<T>()) {
            throw corrupt("checkpoint dtype does not match the model scalar type");
        }
        const std::string_view blob = bytes.substr(12 + len);
        if (blob.size() != header.at("blob_bytes").get<std::size_t>()) throw corrupt("truncated parameter blob");
        if (detail::fnv1a_bytes(blob) != header.at("checksum").get<std::uint64_t>()) {
            throw corrupt("parameter checksum mismatch");
        }

        BasicGeneratorModel<T> model(ModelConfig::from_json(header.at("config")));
        if (!header.at("extractor_config").is_null()) {
            model.extractor.emplace(ExtractorConfig::from_json(header.at("extractor_config")));
        }
        model.dictionary = Dictionary::from_json(header.at("dictionary"));
        if (model.dictionary.size() != model.config.vocab_size) throw corrupt("dictionary size mismatch");
        model.style_norm = detail::style_norm_from_json(header.at("style_norm"));
        model.audio_norm = AudioNorm::from_json(header.at("audio_norm"));
        model.skeleton = SkeletonSpec(header.at("skeleton").get<std::array<double, kNumBones>>());
        model.mean_pose = pose_from_json(header.at("mean_pose"));

        auto params = model.all_params();
        const auto& table = header.at("params");
        if (table.size() != params.size()) throw corrupt("parameter count mismatch");
        std::size_t at = 0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto* p = params[i];
            if (table[i].at("name").get<std::string>() != p->name ||
                table[i].at("rows").get<Eigen::Index>() != p->value.rows() ||
                table[i].at("cols").get<Eigen::Index>() != p->value.cols()) {
                throw corrupt("parameter table does not match architecture at " + p->name);
            }
            const auto n = static_cast<std::size_t>(p->value.size()) * sizeof(T);
            if (at + n > blob.size()) throw corrupt("parameter blob too short");
            std::memcpy(p->value.data(), blob.data() + at, n);
            at += n;
        }
        if (at != blob.size()) throw corrupt("trailing bytes in parameter blob");
        return model;
    } catch (const json::exception& e) {
        throw corrupt(std::string("malformed checkpoint header: ") + e.what());
    }
}

template <class T>
void save_checkpoint(const std::filesystem::path& path, const BasicGeneratorModel<T>& model) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    write_text_file(tmp, encode_checkpoint(model));
    std::filesystem::rename(tmp, path);
}

template <class T = float>
BasicGeneratorModel<T> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint<T>(read_text_file(path));
}

} // namespace sgt
