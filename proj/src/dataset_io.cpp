#include "attx/dataset_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace attx {

namespace {

constexpr char kMagic[8] = {'A', 'T', 'T', 'X', 'W', 'I', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put_u64(out, bits);
    }
}

class Reader {
public:
    explicit Reader(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open dataset " + path);
        buf_.assign((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    }
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw std::runtime_error("dataset file is truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 3; b >= 0; --b)
            v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(b)]);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b)
            v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(b)]);
        pos_ += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> doubles(std::size_t n) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t bits = u64();
            std::memcpy(&out[i], &bits, 8);
        }
        return out;
    }

private:
    std::string buf_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_dataset(const std::string& path, const std::vector<WindowPair>& windows) {
    const std::size_t win_len = windows.empty() ? kWindowSamples : windows.front().ecg.size();
    std::string out;
    out.append(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(win_len));
    put_u64(out, windows.size());
    for (const WindowPair& w : windows) {
        if (w.ecg.size() != win_len || w.eda.size() != win_len)
            throw std::invalid_argument("write_dataset: inconsistent window lengths");
        if (w.subject_id.size() > 0xffff)
            throw std::invalid_argument("write_dataset: subject id too long");
        put_u32(out, static_cast<std::uint32_t>(w.subject_id.size()));
        out += w.subject_id;
        out.push_back(static_cast<char>(w.label));
        put_doubles(out, w.ecg);
        put_doubles(out, w.eda);
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::vector<WindowPair> read_dataset(const std::string& path) {
    Reader r(path);
    const std::string magic = r.bytes(8);
    if (std::memcmp(magic.data(), kMagic, 8) != 0)
        throw std::runtime_error("not a windowed dataset file: " + path);
    if (r.u32() != kVersion) throw std::runtime_error("unsupported dataset version");
    const std::size_t win_len = r.u32();
    const std::uint64_t count = r.u64();

    std::vector<WindowPair> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        WindowPair w;
        const std::size_t id_len = r.u32();
        w.subject_id = r.bytes(id_len);
        const auto label = static_cast<unsigned char>(r.bytes(1)[0]);
        if (label > 1) throw std::runtime_error("dataset label byte out of range");
        w.label = static_cast<BinaryLabel>(label);
        w.ecg = r.doubles(win_len);
        w.eda = r.doubles(win_len);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace attx
