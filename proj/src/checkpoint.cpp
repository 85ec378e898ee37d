#include "skelrep/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skelrep {

namespace {

constexpr uint16_t kCheckpointVersion = 1;

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class T>
void put(std::string& buf, T v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::string serialize_body(const Checkpoint& ckpt) {
    std::string buf;
    buf.append("SKCP", 4);
    put<uint16_t>(buf, kCheckpointVersion);
    put<uint32_t>(buf, static_cast<uint32_t>(ckpt.meta.size()));
    buf.append(ckpt.meta);
    put<uint32_t>(buf, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        put<uint16_t>(buf, static_cast<uint16_t>(t.name.size()));
        buf.append(t.name);
        put<uint8_t>(buf, static_cast<uint8_t>(t.value.ndim()));
        for (int d : t.value.shape) put<uint32_t>(buf, static_cast<uint32_t>(d));
        buf.append(reinterpret_cast<const char*>(t.value.data.data()), t.value.data.size() * sizeof(float));
    }
    return buf;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::string body = serialize_body(*this);
    uint64_t sum = fnv1a(body);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
    os.write(body.data(), static_cast<long>(body.size()));
    os.write(reinterpret_cast<const char*>(&sum), sizeof(sum));
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    std::string all = ss.str();
    if (all.size() < 4 + 2 + 4 + 4 + 8) throw std::runtime_error("checkpoint: file too short");
    std::string body = all.substr(0, all.size() - 8);
    uint64_t stored;
    std::memcpy(&stored, all.data() + all.size() - 8, 8);
    if (fnv1a(body) != stored) throw std::runtime_error("checkpoint: checksum mismatch");

    std::istringstream bs(body);
    char magic[4];
    bs.read(magic, 4);
    if (std::memcmp(magic, "SKCP", 4) != 0) throw std::runtime_error("checkpoint: bad magic");
    uint16_t version = get<uint16_t>(bs);
    if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
    Checkpoint ckpt;
    uint32_t meta_len = get<uint32_t>(bs);
    ckpt.meta.resize(meta_len);
    bs.read(ckpt.meta.data(), meta_len);
    uint32_t count = get<uint32_t>(bs);
    ckpt.tensors.resize(count);
    for (auto& t : ckpt.tensors) {
        uint16_t name_len = get<uint16_t>(bs);
        t.name.resize(name_len);
        bs.read(t.name.data(), name_len);
        uint8_t ndim = get<uint8_t>(bs);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(get<uint32_t>(bs));
        t.value = Tensor(shape);
        bs.read(reinterpret_cast<char*>(t.value.data.data()), static_cast<long>(t.value.data.size() * sizeof(float)));
        if (!bs) throw std::runtime_error("checkpoint: truncated tensor data");
    }
    return ckpt;
}

const Tensor& Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw std::runtime_error("checkpoint: no tensor named '" + name + "'");
}

uint64_t Checkpoint::content_checksum() const { return fnv1a(serialize_body(*this)); }

}  // namespace skelrep
