#include "tayfcs/artifacts.hpp"

#include <cstring>
#include <fstream>

#include "tayfcs/common.hpp"

namespace tayfcs::artifacts {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'Y', 'F', 'S', 'P', 'L', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::string get_str(std::istream& in) {
    std::string s(get_u64(in), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}

void put_dataset(std::ostream& out, const data::Dataset& ds) {
    put_str(out, ds.split_tag);
    put_u64(out, ds.fields.size());
    for (const auto& f : ds.fields) {
        put_str(out, f.name);
        put_u32(out, f.cardinality);
    }
    put_u64(out, ds.num_records());
    out.write(reinterpret_cast<const char*>(ds.labels.data()),
              static_cast<std::streamsize>(ds.labels.size()));
    for (const auto& col : ds.columns) {
        for (uint32_t v : col) put_u32(out, v);
    }
}

data::Dataset get_dataset(std::istream& in) {
    data::Dataset ds;
    ds.split_tag = get_str(in);
    ds.fields.resize(get_u64(in));
    for (size_t f = 0; f < ds.fields.size(); ++f) {
        ds.fields[f].field_id = static_cast<int>(f);
        ds.fields[f].name = get_str(in);
        ds.fields[f].cardinality = get_u32(in);
    }
    const size_t n = get_u64(in);
    ds.labels.resize(n);
    in.read(reinterpret_cast<char*>(ds.labels.data()), static_cast<std::streamsize>(n));
    ds.columns.assign(ds.fields.size(), {});
    for (auto& col : ds.columns) {
        col.resize(n);
        for (uint32_t& v : col) v = get_u32(in);
    }
    return ds;
}

}  // namespace

void save_splits(const data::EncodedSplits& splits, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write splits file: " + path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u64(out, splits.vocab.value_of.size());
    for (size_t f = 0; f < splits.vocab.value_of.size(); ++f) {
        put_u64(out, splits.vocab.value_of[f].size());
        for (const auto& v : splits.vocab.value_of[f]) put_str(out, v);
    }
    put_dataset(out, splits.train);
    put_dataset(out, splits.val);
    put_dataset(out, splits.test);
    if (!out) throw DataError("failed writing splits file: " + path);
}

data::EncodedSplits load_splits(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open splits file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a splits file: " + path);
    }
    if (get_u32(in) != kVersion) throw DataError("unsupported splits version: " + path);

    data::EncodedSplits splits;
    const size_t num_fields = get_u64(in);
    splits.vocab.value_of.resize(num_fields);
    splits.vocab.index_of.resize(num_fields);
    for (size_t f = 0; f < num_fields; ++f) {
        const size_t count = get_u64(in);
        splits.vocab.value_of[f].reserve(count);
        for (size_t i = 0; i < count; ++i) {
            std::string v = get_str(in);
            if (i != 0) splits.vocab.index_of[f].emplace(v, static_cast<uint32_t>(i));
            splits.vocab.value_of[f].push_back(std::move(v));
        }
    }
    splits.train = get_dataset(in);
    splits.val = get_dataset(in);
    splits.test = get_dataset(in);
    if (!in) throw DataError("truncated splits file: " + path);
    return splits;
}

uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for checksum: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

void append_jsonl(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot append to ledger: " + path);
    out << line << '\n';
}

}  // namespace tayfcs::artifacts
