#include "tayfcs/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tayfcs/common.hpp"

namespace tayfcs::data {

uint32_t Vocabulary::encode(int field_id, const std::string& value) const {
    const auto& map = index_of[static_cast<size_t>(field_id)];
    auto it = map.find(value);
    return it == map.end() ? kOovIndex : it->second;
}

const std::string& Vocabulary::decode(int field_id, uint32_t index) const {
    return value_of[static_cast<size_t>(field_id)].at(index);
}

const std::vector<uint32_t>& Dataset::column(int field_id) const {
    if (field_id < 0 || static_cast<size_t>(field_id) >= columns.size()) {
        throw DataError("unknown field_id " + std::to_string(field_id));
    }
    return columns[static_cast<size_t>(field_id)];
}

void Dataset::validate() const {
    if (fields.size() != columns.size()) {
        throw DataError("dataset: schema/column count mismatch");
    }
    for (size_t f = 0; f < columns.size(); ++f) {
        if (columns[f].size() != labels.size()) {
            throw DataError("dataset: column length mismatch in field " + fields[f].name);
        }
        for (uint32_t v : columns[f]) {
            if (v >= fields[f].cardinality) {
                throw DataError("dataset: index out of range in field " + fields[f].name);
            }
        }
    }
    for (uint8_t y : labels) {
        if (y > 1) throw DataError("dataset: labels must be binary");
    }
}

uint64_t schema_hash(const std::vector<FieldSchema>& fields) {
    uint64_t h = fnv1a64("tayfcs-schema");
    for (const auto& f : fields) {
        h = stable_hash64(h, fnv1a64(f.name), f.cardinality);
    }
    return h;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

RawTable load_csv(const std::string& path, const std::string& label_column,
                  char delimiter) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open CSV file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("CSV file has no header row: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_line(line, delimiter);
    RawTable table;
    table.label_name = label_column;
    bool found_label = false;
    int next_id = 0;
    for (size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) {
            if (found_label) {
                throw DataError("duplicate label column '" + label_column + "' in " + path);
            }
            found_label = true;
            table.label_pos = c;
            continue;
        }
        FieldSchema fs;
        fs.field_id = next_id++;
        fs.name = header[c];
        table.schema.push_back(std::move(fs));
    }
    if (!found_label) {
        throw DataError("label column '" + label_column + "' not found in " + path);
    }

    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_line(line, delimiter);
        if (cells.size() != header.size()) {
            throw DataError("ragged row at line " + std::to_string(line_no) + " in " +
                            path + ": expected " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

SplitIndices split(size_t num_rows, const double ratios[3], uint64_t seed) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (ratios[i] <= 0.0) {
            throw ConfigError("split ratios must be positive");
        }
        sum += ratios[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }

    const double n = static_cast<double>(num_rows);
    // Small epsilon inside the floors absorbs binary-representation dust in
    // ratios like 0.1 so that exact-division cases stay exact.
    const size_t n_test = static_cast<size_t>(std::floor(ratios[2] * n + 1e-9));
    const size_t n_holdout =
        static_cast<size_t>(std::floor((ratios[1] + ratios[2]) * n + 1e-9));

    Rng rng(derive_seed(seed, "data.split"));
    std::vector<size_t> order = rng.permutation(num_rows);

    SplitIndices out;
    out.train.assign(order.begin(), order.end() - static_cast<ptrdiff_t>(n_holdout));
    out.val.assign(order.end() - static_cast<ptrdiff_t>(n_holdout),
                   order.end() - static_cast<ptrdiff_t>(n_test));
    out.test.assign(order.end() - static_cast<ptrdiff_t>(n_test), order.end());
    return out;
}

namespace {

Dataset encode_rows(const RawTable& table, const Vocabulary& vocab,
                    const std::vector<size_t>& row_ids,
                    const std::vector<FieldSchema>& fields, const char* tag) {
    Dataset ds;
    ds.fields = fields;
    ds.split_tag = tag;
    ds.columns.assign(fields.size(), {});
    for (auto& col : ds.columns) col.reserve(row_ids.size());
    ds.labels.reserve(row_ids.size());

    for (size_t r : row_ids) {
        const auto& row = table.rows[r];
        const std::string& label = row[table.label_pos];
        if (label != "0" && label != "1") {
            throw DataError("non-binary label '" + label + "' in row " + std::to_string(r));
        }
        ds.labels.push_back(label == "1" ? 1 : 0);
        size_t f = 0;
        for (size_t c = 0; c < row.size(); ++c) {
            if (c == table.label_pos) continue;
            ds.columns[f].push_back(vocab.encode(static_cast<int>(f), row[c]));
            ++f;
        }
    }
    return ds;
}

}  // namespace

EncodedSplits build_vocab_and_encode(const RawTable& table, const SplitIndices& splits) {
    const size_t num_fields = table.schema.size();
    EncodedSplits out;
    out.vocab.index_of.resize(num_fields);
    out.vocab.value_of.resize(num_fields);
    for (size_t f = 0; f < num_fields; ++f) {
        out.vocab.value_of[f].push_back(kOovToken);
    }

    // First-appearance order over the training split keeps indices stable.
    for (size_t r : splits.train) {
        const auto& row = table.rows[r];
        size_t f = 0;
        for (size_t c = 0; c < row.size(); ++c) {
            if (c == table.label_pos) continue;
            auto& map = out.vocab.index_of[f];
            if (map.find(row[c]) == map.end()) {
                const auto idx = static_cast<uint32_t>(out.vocab.value_of[f].size());
                map.emplace(row[c], idx);
                out.vocab.value_of[f].push_back(row[c]);
            }
            ++f;
        }
    }

    std::vector<FieldSchema> fields = table.schema;
    for (size_t f = 0; f < num_fields; ++f) {
        fields[f].cardinality = out.vocab.cardinality(static_cast<int>(f));
        if (fields[f].cardinality < 2) {
            throw DataError("field '" + fields[f].name +
                            "' has no values in the training split");
        }
    }

    out.train = encode_rows(table, out.vocab, splits.train, fields, "train");
    out.val = encode_rows(table, out.vocab, splits.val, fields, "val");
    out.test = encode_rows(table, out.vocab, splits.test, fields, "test");
    return out;
}

Dataset shuffle_field(const Dataset& ds, int field_id, uint64_t seed) {
    if (field_id < 0 || static_cast<size_t>(field_id) >= ds.num_fields()) {
        throw DataError("shuffle_field: unknown field_id " + std::to_string(field_id));
    }
    Dataset out = ds;
    auto& col = out.columns[static_cast<size_t>(field_id)];
    Rng rng(derive_seed(seed, "data.shuffle_field"));
    rng.shuffle(col);
    return out;
}

void SyntheticSpec::validate() const {
    if (num_fields <= 0 || static_cast<size_t>(num_fields) != value_counts.size()) {
        throw ConfigError("synthetic spec: value_counts must list every field");
    }
    for (uint32_t c : value_counts) {
        if (c < 1) throw ConfigError("synthetic spec: fields need at least one value");
    }
    if (!main_effect_weights.empty() &&
        main_effect_weights.size() != static_cast<size_t>(num_fields)) {
        throw ConfigError("synthetic spec: main_effect_weights length mismatch");
    }
    if (!(value_skew >= 1.0)) {
        throw ConfigError("synthetic spec: value_skew must be >= 1");
    }
    for (const auto& combo : planted_combos) {
        if (combo.fields.size() < 2 || combo.fields.size() > 3) {
            throw ConfigError("synthetic spec: planted combos must have 2 or 3 fields");
        }
        for (int f : combo.fields) {
            if (f < 0 || f >= num_fields) {
                throw ConfigError("synthetic spec: planted combo references unknown field");
            }
        }
        if (!std::isfinite(combo.weight)) {
            throw ConfigError("synthetic spec: planted combo weight must be finite");
        }
    }
    if (num_records == 0) throw ConfigError("synthetic spec: num_records must be > 0");
}

namespace {

// Balanced bit per (field, value): a seeded permutation of the value space
// split even/odd. Exactly half of each field's values carry bit 1 (up to one
// for odd counts), so xor-parity patterns have no marginal signal.
std::vector<uint8_t> balanced_bits(uint64_t seed, int field, uint32_t value_count) {
    Rng rng(stable_hash64(seed, static_cast<uint64_t>(field) + 1));
    const std::vector<size_t> perm = rng.permutation(value_count);
    std::vector<uint8_t> bits(value_count + 1, 0);  // indexed by value, 1-based
    for (size_t p = 0; p < perm.size(); ++p) {
        bits[perm[p] + 1] = static_cast<uint8_t>(p & 1);
    }
    return bits;
}

// Deterministic per-value contribution in [-0.5, 0.5] for main effects.
double value_effect(uint64_t seed, int field, uint32_t value) {
    const uint64_t h = stable_hash64(seed, static_cast<uint64_t>(field) + 1, value);
    return static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
}

// Deterministic tuple contribution in [-1, 1] for lookup-table patterns.
double planted_lookup(uint64_t seed, const std::vector<int>& fields,
                      const std::vector<uint32_t>& values) {
    uint64_t h = stable_hash64(seed, 0x6c6f6f6b75704142ULL);
    for (size_t i = 0; i < fields.size(); ++i) {
        h = stable_hash64(h, static_cast<uint64_t>(fields[i]), values[i]);
    }
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    Dataset ds;
    ds.split_tag = "synthetic";
    ds.fields.resize(static_cast<size_t>(spec.num_fields));
    for (int f = 0; f < spec.num_fields; ++f) {
        auto& fs = ds.fields[static_cast<size_t>(f)];
        fs.field_id = f;
        fs.name = "f" + std::to_string(f);
        fs.cardinality = spec.value_counts[static_cast<size_t>(f)] + 1;  // + OOV slot
    }
    ds.columns.assign(static_cast<size_t>(spec.num_fields), {});
    for (auto& col : ds.columns) col.reserve(spec.num_records);
    ds.labels.reserve(spec.num_records);

    Rng rng(derive_seed(spec.seed, "data.synthetic"));
    const uint64_t pattern_seed = derive_seed(spec.seed, "data.synthetic.patterns");
    const uint64_t main_seed = derive_seed(spec.seed, "data.synthetic.mains");

    std::vector<std::vector<uint8_t>> bits(static_cast<size_t>(spec.num_fields));
    for (int f = 0; f < spec.num_fields; ++f) {
        bits[static_cast<size_t>(f)] =
            balanced_bits(pattern_seed, f, spec.value_counts[static_cast<size_t>(f)]);
    }

    std::vector<uint32_t> values(static_cast<size_t>(spec.num_fields));
    std::vector<uint32_t> combo_values;
    for (size_t r = 0; r < spec.num_records; ++r) {
        double logit = spec.bias;
        for (int f = 0; f < spec.num_fields; ++f) {
            const uint32_t count = spec.value_counts[static_cast<size_t>(f)];
            uint32_t v;
            if (spec.value_skew == 1.0) {
                v = 1 + static_cast<uint32_t>(rng.next_below(count));
            } else {
                const double u = std::pow(rng.next_unit(), spec.value_skew);
                v = 1 + std::min<uint32_t>(count - 1, static_cast<uint32_t>(
                                                          u * static_cast<double>(count)));
            }
            values[static_cast<size_t>(f)] = v;
            ds.columns[static_cast<size_t>(f)].push_back(v);
            if (!spec.main_effect_weights.empty()) {
                const double w = spec.main_effect_weights[static_cast<size_t>(f)];
                if (w != 0.0) logit += w * value_effect(main_seed, f, v);
            }
        }
        for (const auto& combo : spec.planted_combos) {
            if (combo.pattern == InteractionPattern::XorParity) {
                bool parity = false;
                for (int f : combo.fields) {
                    parity ^= bits[static_cast<size_t>(f)][values[static_cast<size_t>(f)]] != 0;
                }
                logit += combo.weight * (parity ? 0.5 : -0.5);
            } else {
                combo_values.clear();
                for (int f : combo.fields) {
                    combo_values.push_back(values[static_cast<size_t>(f)]);
                }
                logit += combo.weight * planted_lookup(pattern_seed, combo.fields, combo_values);
            }
        }
        if (spec.noise_level != 0.0) {
            logit += spec.noise_level * rng.next_normal();
        }
        ds.labels.push_back(rng.next_unit() < sigmoid(logit) ? 1 : 0);
    }
    return ds;
}

bool planted_parity(const SyntheticSpec& spec, size_t combo_index,
                    const std::vector<uint32_t>& values) {
    const auto& combo = spec.planted_combos.at(combo_index);
    if (values.size() != combo.fields.size()) {
        throw DataError("planted_parity: value count mismatch");
    }
    const uint64_t pattern_seed = derive_seed(spec.seed, "data.synthetic.patterns");
    bool parity = false;
    for (size_t i = 0; i < combo.fields.size(); ++i) {
        const int f = combo.fields[i];
        const auto bits =
            balanced_bits(pattern_seed, f, spec.value_counts[static_cast<size_t>(f)]);
        parity ^= bits.at(values[i]) != 0;
    }
    return parity;
}

void write_csv(const Dataset& ds, const std::string& label_column,
               const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write CSV file: " + path);
    }
    for (const auto& f : ds.fields) out << f.name << delimiter;
    out << label_column << '\n';
    for (size_t r = 0; r < ds.num_records(); ++r) {
        for (size_t f = 0; f < ds.num_fields(); ++f) {
            out << 'v' << ds.columns[f][r] << delimiter;
        }
        out << static_cast<int>(ds.labels[r]) << '\n';
    }
    if (!out) {
        throw DataError("failed while writing CSV file: " + path);
    }
}

}  // namespace tayfcs::data
