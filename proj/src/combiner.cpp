#include "tayfcs/combiner.hpp"

#include <algorithm>
#include <limits>

#include "tayfcs/common.hpp"

namespace tayfcs::combiner {

CombinationSpec make_combo(std::vector<int> fields,
                           const std::vector<data::FieldSchema>& schema) {
    if (fields.empty() || fields.size() > 3) {
        throw ConfigError("combination must reference 1 to 3 fields");
    }
    std::sort(fields.begin(), fields.end());
    for (size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] < 0 || static_cast<size_t>(fields[i]) >= schema.size()) {
            throw DataError("combination references unknown field id " +
                            std::to_string(fields[i]));
        }
        if (i > 0 && fields[i] == fields[i - 1]) {
            throw ConfigError("combination fields must be distinct");
        }
    }
    CombinationSpec combo;
    combo.fields = std::move(fields);
    for (size_t i = 0; i < combo.fields.size(); ++i) {
        if (i > 0) combo.name += 'x';
        combo.name += schema[static_cast<size_t>(combo.fields[i])].name;
    }
    // Degenerate single-field spec: an exact copy of one column, used by the
    // redundancy harness. The suffix keeps its name clear of the original.
    if (combo.fields.size() == 1) combo.name += ".copy";
    return combo;
}

uint128 combined_cardinality(const CombinationSpec& combo,
                             const std::vector<data::FieldSchema>& schema) {
    uint128 product = 1;
    for (int f : combo.fields) {
        product *= static_cast<uint128>(schema[static_cast<size_t>(f)].cardinality);
    }
    return product;
}

HashedVocab make_hashed_vocab(uint128 raw_cardinality, uint64_t tau) {
    if (tau == 0 || tau > std::numeric_limits<uint32_t>::max()) {
        throw ConfigError("tau must be in [1, 2^32)");
    }
    HashedVocab hv;
    hv.raw = raw_cardinality;
    hv.tau = tau;
    hv.effective = raw_cardinality > static_cast<uint128>(tau)
                       ? tau
                       : static_cast<uint64_t>(raw_cardinality);
    return hv;
}

uint64_t combined_value_id(const CombinationSpec& combo,
                           std::span<const uint32_t> values,
                           const std::vector<data::FieldSchema>& schema,
                           uint64_t tau) {
    if (values.size() != combo.fields.size()) {
        throw DataError("combined_value_id: value count mismatch");
    }
    uint128 raw_id = 0;
    for (size_t i = 0; i < combo.fields.size(); ++i) {
        const auto& fs = schema[static_cast<size_t>(combo.fields[i])];
        if (values[i] >= fs.cardinality) {
            throw DataError("combined_value_id: constituent index out of range for " +
                            fs.name);
        }
        raw_id = raw_id * static_cast<uint128>(fs.cardinality) + values[i];
    }
    const uint128 raw_card = combined_cardinality(combo, schema);
    if (raw_card <= static_cast<uint128>(tau)) {
        return static_cast<uint64_t>(raw_id);
    }
    const uint64_t salt = fnv1a64(combo.name);
    const uint64_t hi = static_cast<uint64_t>(raw_id >> 64);
    const uint64_t lo = static_cast<uint64_t>(raw_id);
    return stable_hash64(salt, hi, lo) % tau;
}

data::Dataset materialize(const data::Dataset& ds,
                          const std::vector<CombinationSpec>& combos,
                          uint64_t tau) {
    if (tau == 0 || tau > std::numeric_limits<uint32_t>::max()) {
        throw ConfigError("tau must be in [1, 2^32)");
    }
    for (size_t a = 0; a < combos.size(); ++a) {
        for (size_t b = a + 1; b < combos.size(); ++b) {
            if (combos[a] == combos[b]) {
                throw ConfigError("duplicate combination: " + combos[a].name);
            }
        }
        for (const auto& fs : ds.fields) {
            if (fs.name == combos[a].name) {
                throw ConfigError("combination already materialized: " + combos[a].name);
            }
        }
    }

    data::Dataset out = ds;
    const size_t n = ds.num_records();
    std::vector<uint32_t> values;
    for (const auto& combo : combos) {
        const HashedVocab hv = make_hashed_vocab(combined_cardinality(combo, ds.fields), tau);

        std::vector<uint32_t> col(n);
        values.resize(combo.fields.size());
        for (size_t r = 0; r < n; ++r) {
            for (size_t i = 0; i < combo.fields.size(); ++i) {
                values[i] = ds.columns[static_cast<size_t>(combo.fields[i])][r];
            }
            col[r] = static_cast<uint32_t>(combined_value_id(combo, values, ds.fields, tau));
        }

        data::FieldSchema fs;
        fs.field_id = static_cast<int>(out.fields.size());
        fs.name = combo.name;
        fs.cardinality = static_cast<uint32_t>(hv.effective);
        out.fields.push_back(std::move(fs));
        out.columns.push_back(std::move(col));
    }
    return out;
}

std::string format_uint128(uint128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace tayfcs::combiner
