#include "skewer/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "skewer/errors.hpp"

namespace skewer {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'B', 'C', 'K', 'P', 'T', '0', '1'};
constexpr int kFormatVersion = 1;

void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64_le(std::string& out, double v) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

double get_f64_le(const unsigned char* p) {
    return std::bit_cast<double>(get_u64_le(p));
}

}  // namespace

void save_checkpoint(const PolicyState& policy, const std::string& algorithm,
                     const std::string& path) {
    const auto d = static_cast<std::size_t>(policy.hyper.d);
    const auto k = static_cast<std::size_t>(policy.hyper.k);

    json meta;
    meta["format_version"] = kFormatVersion;
    meta["d"] = policy.hyper.d;
    meta["k"] = policy.hyper.k;
    meta["lambda"] = policy.hyper.lambda;
    meta["algorithm"] = algorithm;
    meta["exploration_params"] = {{"epsilon", policy.hyper.epsilon},
                                  {"alpha", policy.hyper.alpha}};
    meta["rounds_learned"] = policy.rounds_learned;
    const std::string meta_text = meta.dump();

    std::string blob;
    blob.reserve(16 + meta_text.size() + checkpoint_payload_size(d, k));
    blob.append(kMagic, sizeof(kMagic));
    put_u64_le(blob, meta_text.size());
    blob += meta_text;
    for (const ArmState& arm : policy.arms) {
        for (double v : arm.a_matrix()) put_f64_le(blob, v);
        for (double v : arm.b_vector()) put_f64_le(blob, v);
        for (double v : arm.theta()) put_f64_le(blob, v);
    }

    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename checkpoint into place at " + path);
    }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());

    if (blob.size() < 16) throw TruncatedCheckpointError(path + ": shorter than the fixed header");
    if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
        throw BadMagicError(path + ": bad magic bytes");
    }
    const std::uint64_t meta_len = get_u64_le(bytes + 8);
    if (16 + meta_len > blob.size()) {
        throw TruncatedCheckpointError(path + ": metadata extends past end of file");
    }

    json meta;
    try {
        meta = json::parse(blob.substr(16, meta_len));
    } catch (const json::parse_error& e) {
        throw IoError(path + ": malformed metadata JSON: " + e.what());
    }

    int version = 0;
    HyperParams hyper;
    std::uint64_t rounds_learned = 0;
    std::string algorithm;
    try {
        version = meta.at("format_version").get<int>();
        if (version != kFormatVersion) {
            throw VersionMismatchError(path + ": format version " + std::to_string(version) +
                                       ", expected " + std::to_string(kFormatVersion));
        }
        hyper.d = meta.at("d").get<int>();
        hyper.k = meta.at("k").get<int>();
        hyper.lambda = meta.at("lambda").get<double>();
        algorithm = meta.at("algorithm").get<std::string>();
        const auto& exp = meta.at("exploration_params");
        hyper.epsilon = exp.at("epsilon").get<double>();
        hyper.alpha = exp.at("alpha").get<double>();
        rounds_learned = meta.at("rounds_learned").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw IoError(path + ": metadata missing fields: " + e.what());
    }
    hyper.validate();

    const auto d = static_cast<std::size_t>(hyper.d);
    const auto k = static_cast<std::size_t>(hyper.k);
    const std::size_t expected = checkpoint_payload_size(d, k);
    const std::size_t have = blob.size() - 16 - meta_len;
    if (have < expected) {
        throw TruncatedCheckpointError(path + ": float payload has " + std::to_string(have) +
                                       " bytes, expected " + std::to_string(expected));
    }
    if (have > expected) {
        throw IoError(path + ": unexpected trailing bytes after float payload");
    }

    LoadedCheckpoint loaded;
    loaded.algorithm = std::move(algorithm);
    loaded.policy.hyper = hyper;
    loaded.policy.rounds_learned = rounds_learned;
    const unsigned char* p = bytes + 16 + meta_len;
    auto read_block = [&p](std::size_t n) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i, p += 8) values[i] = get_f64_le(p);
        return values;
    };
    loaded.policy.arms.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
        auto a_matrix = read_block(d * d);
        auto b = read_block(d);
        auto theta = read_block(d);
        loaded.policy.arms[a].restore(std::move(a_matrix), std::move(b), std::move(theta));
    }
    return loaded;
}

}  // namespace skewer
