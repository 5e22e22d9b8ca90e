#pragma once

#include <string>

#include "hsac/params.hpp"

namespace hsac {

// On-disk layout: a text manifest (format version, digest of the embedded
// config, the config itself, array names and shapes) followed by one raw
// little-endian blob of 64-bit values in manifest order. Round trips are
// bit-exact.
struct CheckpointContents {
  std::string config_json;
  ParameterSet arrays;
};

void save_checkpoint(const std::string& path, const ParameterSet& arrays,
                     const std::string& config_json);

// Parses and validates the file itself (version line, internal digest
// consistency, shape bookkeeping). Throws CheckpointVersionError or
// CheckpointFormatError.
CheckpointContents read_checkpoint(const std::string& path);

// read_checkpoint plus a check that the stored digest matches the digest of
// `expected_config_json`; mismatch throws CheckpointDigestError.
CheckpointContents load_checkpoint(const std::string& path,
                                   const std::string& expected_config_json);

}  // namespace hsac
