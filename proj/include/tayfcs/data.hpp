#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace tayfcs::data {

// Index 0 of every vocabulary is reserved for out-of-vocabulary values.
inline constexpr uint32_t kOovIndex = 0;
inline constexpr const char* kOovToken = "<OOV>";

struct FieldSchema {
    int field_id = 0;            // contiguous 0..F-1 over feature columns
    std::string name;
    uint32_t cardinality = 0;    // distinct values incl. the reserved OOV slot
    bool is_label = false;
};

// Raw CSV contents: header-derived schemas (label column excluded from the
// field list) plus rows in file order. Cardinalities are filled in later by
// vocabulary construction.
struct RawTable {
    std::vector<FieldSchema> schema;              // feature columns only
    std::string label_name;
    size_t label_pos = 0;                         // column position in rows
    std::vector<std::vector<std::string>> rows;   // all columns, file order
};

struct Vocabulary {
    // Per field: value string -> index (1..cardinality-1) and the reverse.
    // index_of[f][v] is only populated from the training split.
    std::vector<std::unordered_map<std::string, uint32_t>> index_of;
    std::vector<std::vector<std::string>> value_of;  // value_of[f][0] == kOovToken

    uint32_t encode(int field_id, const std::string& value) const;
    const std::string& decode(int field_id, uint32_t index) const;
    uint32_t cardinality(int field_id) const {
        return static_cast<uint32_t>(value_of[static_cast<size_t>(field_id)].size());
    }
};

struct Dataset {
    std::vector<FieldSchema> fields;            // no label entries
    std::vector<std::vector<uint32_t>> columns; // one per field, equal length
    std::vector<uint8_t> labels;                // y in {0,1}
    std::string split_tag;                      // train|val|test|...

    size_t num_records() const { return labels.size(); }
    size_t num_fields() const { return fields.size(); }
    const std::vector<uint32_t>& column(int field_id) const;
    void validate() const;  // throws DataError on broken invariants
};

uint64_t schema_hash(const std::vector<FieldSchema>& fields);

struct SplitIndices {
    std::vector<size_t> train, val, test;
};

struct EncodedSplits {
    Vocabulary vocab;
    Dataset train, val, test;
};

RawTable load_csv(const std::string& path, const std::string& label_column,
                  char delimiter = ',');

// Seeded random row partition. Sizes: test = floor(r_test*N), holdout =
// floor((r_val+r_test)*N), val = holdout - test, train = N - holdout, so the
// rounding remainder always lands in train.
SplitIndices split(size_t num_rows, const double ratios[3], uint64_t seed);

// Vocabulary is built from the training rows only; val/test values unseen in
// train encode to kOovIndex.
EncodedSplits build_vocab_and_encode(const RawTable& table, const SplitIndices& splits);

// Returns a copy with one column permuted by a seeded permutation.
Dataset shuffle_field(const Dataset& ds, int field_id, uint64_t seed);

enum class InteractionPattern { XorParity, LookupTable };

struct PlantedCombo {
    std::vector<int> fields;
    InteractionPattern pattern = InteractionPattern::XorParity;
    double weight = 0.0;
};

struct SyntheticSpec {
    int num_fields = 0;
    std::vector<uint32_t> value_counts;     // distinct values per field (excl. OOV)
    std::vector<PlantedCombo> planted_combos;
    std::vector<double> main_effect_weights;  // optional, per field
    // Power-law skew of value draws: value = 1 + floor(count * u^skew).
    // 1 = uniform; larger concentrates mass on low indices like real logs.
    double value_skew = 1.0;
    double noise_level = 0.0;
    double bias = 0.0;
    size_t num_records = 0;
    uint64_t seed = 0;

    void validate() const;
};

// Labels drawn Bernoulli(sigmoid(bias + planted contributions + noise)).
// Xor-parity combos assign a seeded random bit to every field value and xor
// them, so each constituent field has near-zero marginal label correlation.
Dataset generate_synthetic(const SyntheticSpec& spec);

// The parity bit a generated record carries for one planted xor combo, given
// the record's values for that combo's fields. Validation-harness helper.
bool planted_parity(const SyntheticSpec& spec, size_t combo_index,
                    const std::vector<uint32_t>& values);

// Writes a dataset back out as CSV ("v<idx>" values), for pipeline input.
void write_csv(const Dataset& ds, const std::string& label_column,
               const std::string& path, char delimiter = ',');

}  // namespace tayfcs::data
