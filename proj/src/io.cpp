#include "skelrep/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace skelrep {

namespace {

// Little-endian scalar IO. The build targets little-endian hosts; verified by
// a static assert on float layout at roundtrip tests.
template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("skseq: truncated file");
    return v;
}

}  // namespace

void write_skseq(std::ostream& os, const SkeletonSequence& seq) {
    os.write("SKSQ", 4);
    put<uint16_t>(os, kSkseqVersion);
    put<uint8_t>(os, static_cast<uint8_t>(kNumJoints));
    put<float>(os, seq.fps);
    put<uint32_t>(os, static_cast<uint32_t>(seq.frames.size()));
    put<int32_t>(os, seq.label);
    put<int32_t>(os, seq.subject_id);
    for (const auto& f : seq.frames)
        for (const auto& j : f.joints) {
            put<float>(os, j.x);
            put<float>(os, j.y);
            put<float>(os, j.z);
        }
}

SkeletonSequence read_skseq(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SKSQ", 4) != 0) throw std::runtime_error("skseq: bad magic");
    uint16_t version = get<uint16_t>(is);
    if (version != kSkseqVersion) throw std::runtime_error("skseq: unsupported version " + std::to_string(version));
    uint8_t joints = get<uint8_t>(is);
    if (joints != kNumJoints) throw std::runtime_error("skseq: joint count must be 15, got " + std::to_string(joints));
    SkeletonSequence seq;
    seq.fps = get<float>(is);
    uint32_t frames = get<uint32_t>(is);
    seq.label = get<int32_t>(is);
    seq.subject_id = get<int32_t>(is);
    seq.frames.resize(frames);
    for (auto& f : seq.frames)
        for (auto& j : f.joints) {
            j.x = get<float>(is);
            j.y = get<float>(is);
            j.z = get<float>(is);
        }
    return seq;
}

void save_skseq(const std::string& path, const SkeletonSequence& seq) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_skseq(os, seq);
}

SkeletonSequence load_skseq(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_skseq(is);
}

std::string to_jsonl_line(const SkeletonSequence& seq) {
    nlohmann::json j;
    j["fps"] = seq.fps;
    j["label"] = seq.label;
    j["subject_id"] = seq.subject_id;
    auto& frames = j["frames"] = nlohmann::json::array();
    for (const auto& f : seq.frames) {
        nlohmann::json fr = nlohmann::json::array();
        for (const auto& p : f.joints) fr.push_back({p.x, p.y, p.z});
        frames.push_back(std::move(fr));
    }
    return j.dump();
}

SkeletonSequence from_jsonl_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    SkeletonSequence seq;
    seq.fps = j.value("fps", 30.0f);
    seq.label = j.value("label", -1);
    seq.subject_id = j.value("subject_id", -1);
    const auto& frames = j.at("frames");
    seq.frames.resize(frames.size());
    for (size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].size() != kNumJoints)
            throw std::runtime_error("jsonl: frame " + std::to_string(f) + " must have 15 joints");
        for (int k = 0; k < kNumJoints; ++k) {
            seq.frames[f].joints[k].x = frames[f][k].at(0).get<float>();
            seq.frames[f].joints[k].y = frames[f][k].at(1).get<float>();
            seq.frames[f].joints[k].z = frames[f][k].at(2).get<float>();
        }
    }
    return seq;
}

std::vector<SkeletonSequence> load_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::vector<SkeletonSequence> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(from_jsonl_line(line));
    }
    return out;
}

void save_jsonl(const std::string& path, const std::vector<SkeletonSequence>& seqs) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    for (const auto& s : seqs) os << to_jsonl_line(s) << "\n";
}

}  // namespace skelrep
