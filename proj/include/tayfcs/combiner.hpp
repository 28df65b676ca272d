#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tayfcs/data.hpp"

namespace tayfcs::combiner {

// Embedding-table size threshold above which combination ids go through the
// hash-modulo compression.
inline constexpr uint64_t kDefaultTau = 5'000'000;

using uint128 = unsigned __int128;

// A synthesized field formed from 2-3 original fields. Order-1 specs are
// allowed mechanically (an exact copy of one original column); the scorer
// never emits them, they exist for redundancy experiments.
struct CombinationSpec {
    std::vector<int> fields;  // strictly increasing original field ids
    std::string name;         // constituent names joined with 'x'

    int order() const { return static_cast<int>(fields.size()); }
    bool operator==(const CombinationSpec& other) const { return fields == other.fields; }
};

// Canonicalizes (sorts) the tuple and validates it against the schema.
CombinationSpec make_combo(std::vector<int> fields,
                           const std::vector<data::FieldSchema>& schema);

// Product of constituent cardinalities, computed in 128-bit.
uint128 combined_cardinality(const CombinationSpec& combo,
                             const std::vector<data::FieldSchema>& schema);

struct HashedVocab {
    uint128 raw = 0;         // product of constituent cardinalities
    uint64_t effective = 0;  // min(raw, tau)
    uint64_t tau = 0;

    bool hashed() const { return raw > static_cast<uint128>(effective); }
};

HashedVocab make_hashed_vocab(uint128 raw_cardinality, uint64_t tau);

// Mixed-radix id over constituent value indices (first field most
// significant); above tau the id is stable_hash64 of the raw id salted by
// the combo name, mod tau. Identical across runs and machines.
uint64_t combined_value_id(const CombinationSpec& combo,
                           std::span<const uint32_t> values,
                           const std::vector<data::FieldSchema>& schema,
                           uint64_t tau);

// Appends one integer column per combo (original columns untouched) plus the
// matching schema entries. Duplicate combos are rejected.
data::Dataset materialize(const data::Dataset& ds,
                          const std::vector<CombinationSpec>& combos,
                          uint64_t tau);

std::string format_uint128(uint128 v);

}  // namespace tayfcs::combiner
