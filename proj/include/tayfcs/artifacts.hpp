#pragma once

#include <cstdint>
#include <string>

#include "tayfcs/data.hpp"

namespace tayfcs::artifacts {

// Encoded splits container, binary, little-endian. Layout: magic "TAYFSPLT",
// u32 version, vocabulary (per field: name, value strings in index order),
// then the three datasets (schema, labels, u32 columns). Round-trips exactly.
void save_splits(const data::EncodedSplits& splits, const std::string& path);
data::EncodedSplits load_splits(const std::string& path);

// Stable digest of a file's bytes (fnv1a64). Used for artifact provenance
// and run-to-run determinism checks.
uint64_t file_checksum(const std::string& path);

void append_jsonl(const std::string& path, const std::string& line);

}  // namespace tayfcs::artifacts
