#include "attx/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace attx {

namespace {

std::string base_path(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return path.substr(0, path.size() - 5);
    return path;
}

// little-endian on-disk layout regardless of host order
void append_le(std::string& out, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &v[i], 8);
        for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for write: " + tmp);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::string bin_name_of(const std::string& manifest_path) {
    const std::string base = base_path(manifest_path);
    const auto slash = base.find_last_of('/');
    return (slash == std::string::npos ? base : base.substr(slash + 1)) + ".bin";
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params,
                     const std::vector<NamedState>& state, const nlohmann::json& meta) {
    const std::string base = base_path(path);
    std::string blob;
    nlohmann::json entries = nlohmann::json::array();

    auto add = [&](const std::string& name, const std::vector<std::size_t>& shape,
                   const double* data, std::size_t count) {
        entries.push_back({{"name", name},
                           {"shape", shape},
                           {"offset", blob.size()},
                           {"count", count}});
        append_le(blob, data, count);
    };
    for (const NamedParam& p : params)
        add(p.name, p.tensor.shape(), p.tensor.data(), p.tensor.numel());
    for (const NamedState& s : state)
        add(s.name, {s.values->size()}, s.values->data(), s.values->size());

    nlohmann::json manifest = {
        {"format", "attx-checkpoint"},
        {"version", 1},
        {"dtype", "float64le"},
        {"binary", bin_name_of(path)},
        {"entries", entries},
        {"meta", meta},
    };
    atomic_write(base + ".bin", blob);
    atomic_write(base + ".json", manifest.dump(2) + "\n");
}

Checkpoint::Checkpoint(const std::string& path) {
    const std::string base = base_path(path);
    std::ifstream mf(base + ".json");
    if (!mf) throw std::runtime_error("cannot open checkpoint manifest: " + base + ".json");
    nlohmann::json manifest = nlohmann::json::parse(mf);
    if (manifest.value("format", "") != "attx-checkpoint")
        throw std::runtime_error("not an attx checkpoint: " + path);
    if (manifest.value("version", 0) != 1)
        throw std::runtime_error("unsupported checkpoint version");
    meta_ = manifest.value("meta", nlohmann::json::object());

    const auto slash = base.find_last_of('/');
    const std::string dir = slash == std::string::npos ? "" : base.substr(0, slash + 1);
    const std::string bin = dir + manifest.at("binary").get<std::string>();
    std::ifstream bf(bin, std::ios::binary);
    if (!bf) throw std::runtime_error("cannot open checkpoint binary: " + bin);
    std::string raw((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
    if (raw.size() % 8 != 0) throw std::runtime_error("checkpoint binary is truncated");
    blob_.resize(raw.size() / 8);
    for (std::size_t i = 0; i < blob_.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b)
            bits = (bits << 8) | static_cast<unsigned char>(raw[i * 8 + static_cast<std::size_t>(b)]);
        std::memcpy(&blob_[i], &bits, 8);
    }

    for (const auto& e : manifest.at("entries")) {
        Entry entry;
        entry.shape = e.at("shape").get<std::vector<std::size_t>>();
        entry.offset = e.at("offset").get<std::size_t>();
        entry.count = e.at("count").get<std::size_t>();
        if (entry.offset % 8 != 0 || entry.offset / 8 + entry.count > blob_.size())
            throw std::runtime_error("checkpoint entry out of bounds: " +
                                     e.at("name").get<std::string>());
        entries_.emplace_back(e.at("name").get<std::string>(), entry);
    }
}

const Checkpoint::Entry& Checkpoint::find(const std::string& name) const {
    for (const auto& [n, e] : entries_)
        if (n == name) return e;
    throw std::runtime_error("checkpoint has no entry named " + name);
}

bool Checkpoint::has(const std::string& name) const {
    for (const auto& [n, e] : entries_)
        if (n == name) return true;
    return false;
}

std::vector<std::size_t> Checkpoint::shape(const std::string& name) const {
    return find(name).shape;
}

std::vector<double> Checkpoint::values(const std::string& name) const {
    const Entry& e = find(name);
    const std::size_t start = e.offset / 8;
    return {blob_.begin() + static_cast<std::ptrdiff_t>(start),
            blob_.begin() + static_cast<std::ptrdiff_t>(start + e.count)};
}

void Checkpoint::restore(std::vector<NamedParam>& params,
                         const std::vector<NamedState>& state) const {
    for (NamedParam& p : params) {
        std::vector<double> v = values(p.name);
        if (v.size() != p.tensor.numel())
            throw std::runtime_error("checkpoint size mismatch for " + p.name);
        p.tensor.vec() = std::move(v);
        p.tensor.zero_grad();
    }
    for (const NamedState& s : state) {
        std::vector<double> v = values(s.name);
        if (v.size() != s.values->size() && !s.values->empty())
            throw std::runtime_error("checkpoint size mismatch for " + s.name);
        *s.values = std::move(v);
    }
}

}  // namespace attx
