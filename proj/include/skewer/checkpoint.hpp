#pragma once

#include <cstddef>
#include <string>

#include "skewer/policy.hpp"

namespace skewer {

// Checkpoint container (format version 1):
//   bytes 0..7    magic "CBCKPT01"
//   bytes 8..15   unsigned little-endian length n of the metadata
//   n bytes       JSON metadata {format_version, d, k, lambda, algorithm,
//                 exploration_params, rounds_learned}
//   then per arm a = 0..k-1, little-endian 64-bit floats:
//                 A row-major (d*d), b (d), theta (d)
// The float payload is exactly k*(d*d + 2d)*8 bytes. Loading a saved policy
// recovers every field bit-for-bit, so learning resumes exactly.

constexpr std::size_t checkpoint_payload_size(std::size_t d, std::size_t k) {
    return k * (d * d + 2 * d) * 8;
}

struct LoadedCheckpoint {
    PolicyState policy;
    std::string algorithm;  // strategy name recorded at save time
};

// Writes atomically (temp file + rename), so a failed save leaves any
// existing checkpoint untouched.
void save_checkpoint(const PolicyState& policy, const std::string& algorithm,
                     const std::string& path);

// Throws BadMagicError / TruncatedCheckpointError / VersionMismatchError
// for the matching corruption kinds.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace skewer
