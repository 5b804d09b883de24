#include "fer/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "fer/error.hpp"

namespace fer {

namespace {

constexpr char kMagic[8] = {'F', 'E', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
    std::uint64_t u64() { return raw(8); }
    double f64() {
        const std::uint64_t bits = raw(8);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    std::uint64_t raw(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) throw data_error("checkpoint: truncated file");
    }
    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_param_container(const std::filesystem::path& path, const ParamContainer& container) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u64(out, container.json_header.size());
    out += container.json_header;
    put_u64(out, container.tensors.size());
    for (const auto& t : container.tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.id.size()));
        out += t.id;
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        std::size_t numel = 1;
        for (int d : t.shape) {
            put_u32(out, static_cast<std::uint32_t>(d));
            numel *= static_cast<std::size_t>(d);
        }
        if (numel != t.data.size())
            throw data_error("checkpoint: tensor '" + t.id + "' shape does not match value count");
        put_u64(out, t.data.size());
        for (double v : t.data) put_f64(out, v);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw data_error("checkpoint: cannot open '" + path.string() + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw data_error("checkpoint: write failed for '" + path.string() + "'");
}

ParamContainer load_param_container(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("checkpoint: cannot open '" + path.string() + "'");
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r(std::move(data));
    if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
        throw data_error("checkpoint: bad magic in '" + path.string() + "'");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw data_error("checkpoint: unsupported format version " + std::to_string(version));

    ParamContainer container;
    container.json_header = r.bytes(r.u64());
    const std::uint64_t count = r.u64();
    container.tensors.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        NamedTensorData t;
        t.id = r.bytes(r.u32());
        const std::uint32_t ndims = r.u32();
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < ndims; ++d) {
            t.shape.push_back(static_cast<int>(r.u32()));
            numel *= static_cast<std::size_t>(t.shape.back());
        }
        const std::uint64_t n = r.u64();
        if (n != numel)
            throw data_error("checkpoint: tensor '" + t.id + "' count mismatch");
        t.data.resize(n);
        for (std::uint64_t j = 0; j < n; ++j) t.data[j] = r.f64();
        container.tensors.push_back(std::move(t));
    }
    if (!r.at_end()) throw data_error("checkpoint: trailing bytes in '" + path.string() + "'");
    return container;
}

}  // namespace fer
