#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "skelrep/io.hpp"
#include "skelrep/rng.hpp"
#include "skelrep/skeleton.hpp"

using namespace skelrep;

namespace {

SkeletonSequence random_sequence(RngStream& rng, int frames) {
    SkeletonSequence s;
    s.fps = 30.0f;
    s.label = static_cast<int>(rng.uniform_int(60));
    s.subject_id = static_cast<int>(rng.uniform_int(40));
    s.frames.resize(frames);
    for (auto& f : s.frames)
        for (auto& j : f.joints) {
            // multiples of 2^-10 are exact in both f32 and f64, so the f32
            // file format can round-trip them bit-exactly
            auto draw = [&rng] { return static_cast<double>(rng.uniform_int(4097)) / 1024.0 - 2.0; };
            j.x = draw();
            j.y = draw();
            j.z = draw();
        }
    return s;
}

bool identical(const SkeletonSequence& a, const SkeletonSequence& b) {
    if (a.fps != b.fps || a.label != b.label || a.subject_id != b.subject_id) return false;
    if (a.num_frames() != b.num_frames()) return false;
    for (int f = 0; f < a.num_frames(); ++f)
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& p = a.frames[f].joints[j];
            const Vec3& q = b.frames[f].joints[j];
            if (p.x != q.x || p.y != q.y || p.z != q.z) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("joint names map one-to-one onto the canonical order") {
    const auto& names = joint_names();
    for (int i = 0; i < kNumJoints; ++i) {
        auto id = joint_from_name(names[i]);
        REQUIRE(id.has_value());
        CHECK(static_cast<int>(*id) == i);
    }
    CHECK(!joint_from_name("pelvis").has_value());
    CHECK(static_cast<int>(JointId::kTorso) == 14);
}

TEST_CASE("validate_sequence flags empty, bad fps, bad labels and non-finite joints") {
    SkeletonSequence s;
    CHECK(!validate_sequence(s).ok());

    s.frames.resize(3);
    s.fps = 30.0f;
    s.label = 10;
    CHECK(validate_sequence(s).ok());

    s.label = 60;
    CHECK(!validate_sequence(s, 59).ok());
    CHECK(validate_sequence(s, 60).ok());
    s.label = -1;  // unlabeled is fine
    CHECK(validate_sequence(s).ok());

    s.frames[1].joints[4].y = std::numeric_limits<double>::quiet_NaN();
    ValidationResult r = validate_sequence(s);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].frame == 1);
    CHECK(r.violations[0].joint == 4);

    s.frames[1].joints[4].y = 0.0;
    s.fps = 0.0f;
    CHECK(!validate_sequence(s).ok());
}

TEST_CASE("window slices with stride and copies metadata") {
    RngStream rng(1, 0);
    SkeletonSequence s = random_sequence(rng, 120);
    auto wins = window(s, 50, 25);
    // starts 0, 25, 50, 70 is out of range: (120-50)/25+1 = 3
    REQUIRE(wins.size() == 3);
    for (size_t w = 0; w < wins.size(); ++w) {
        CHECK(wins[w].num_frames() == 50);
        CHECK(wins[w].label == s.label);
        CHECK(wins[w].subject_id == s.subject_id);
        for (int f = 0; f < 50; ++f)
            CHECK(wins[w].frames[f].joints[3].x == s.frames[w * 25 + f].joints[3].x);
    }
    CHECK(window(s, 121, 1).empty());
    CHECK(window(s, 120, 999).size() == 1);
    CHECK_THROWS(window(s, 0, 1));
    CHECK_THROWS(window(s, 50, 0));
}

TEST_CASE("to_tensor / from_tensor round-trip") {
    RngStream rng(2, 0);
    SkeletonSequence s = random_sequence(rng, 17);
    Tensor t = to_tensor(s);
    REQUIRE(t.shape == std::vector<int>{17, kNumJoints, 3});
    CHECK(t.at((5 * kNumJoints + 7) * 3 + 2) == doctest::Approx(s.frames[5].joints[7].z));
    SkeletonSequence back = from_tensor(t, s.fps, s.label, s.subject_id);
    CHECK(identical(s, back));
    CHECK_THROWS(from_tensor(Tensor({17, 14, 3})));
}

TEST_CASE("adjacency is a symmetrically normalized 14-edge tree") {
    SkeletonGraph g = build_adjacency();
    REQUIRE(g.edges.size() == 14);
    REQUIRE(g.adjacency.shape == std::vector<int>{kNumJoints, kNumJoints});

    // reconstruct A + I and degrees independently from the edge list
    std::array<std::array<int, kNumJoints>, kNumJoints> a{};
    for (int i = 0; i < kNumJoints; ++i) a[i][i] = 1;
    for (auto [i, j] : g.edges) {
        CHECK(i != j);
        a[i][j] = a[j][i] = 1;
    }
    std::array<int, kNumJoints> deg{};
    for (int i = 0; i < kNumJoints; ++i)
        for (int j = 0; j < kNumJoints; ++j) deg[i] += a[i][j];

    for (int i = 0; i < kNumJoints; ++i)
        for (int j = 0; j < kNumJoints; ++j) {
            double expect = a[i][j] / std::sqrt(static_cast<double>(deg[i]) * deg[j]);
            CHECK(g.adjacency.at(i, j) == doctest::Approx(expect).epsilon(1e-6));
            CHECK(g.adjacency.at(i, j) == g.adjacency.at(j, i));
        }

    // a tree over 15 joints is connected: breadth-first search reaches all
    std::array<bool, kNumJoints> seen{};
    std::vector<int> q{0};
    seen[0] = true;
    while (!q.empty()) {
        int cur = q.back();
        q.pop_back();
        for (auto [i, j] : g.edges) {
            int other = -1;
            if (i == cur) other = j;
            if (j == cur) other = i;
            if (other >= 0 && !seen[other]) {
                seen[other] = true;
                q.push_back(other);
            }
        }
    }
    for (bool b : seen) CHECK(b);
}

TEST_CASE("1000 random sequences survive the .skseq round-trip bit-exactly") {
    RngStream rng(7, 0);
    for (int i = 0; i < 1000; ++i) {
        SkeletonSequence s = random_sequence(rng, 1 + static_cast<int>(rng.uniform_int(80)));
        std::stringstream buf;
        write_skseq(buf, s);
        SkeletonSequence back = read_skseq(buf);
        REQUIRE(identical(s, back));
    }
}

TEST_CASE("skseq files reject corrupted headers") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "skelrep_test_skeleton";
    fs::create_directories(dir);
    std::string path = (dir / "a.skseq").string();

    RngStream rng(8, 0);
    SkeletonSequence s = random_sequence(rng, 12);
    save_skseq(path, s);
    CHECK(identical(load_skseq(path), s));

    // clobber the magic
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
    }
    CHECK_THROWS(load_skseq(path));
    CHECK_THROWS(load_skseq((dir / "missing.skseq").string()));
    fs::remove_all(dir);
}

TEST_CASE("jsonl round-trip preserves data to f32 precision") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "skelrep_test_skeleton_jsonl";
    fs::create_directories(dir);
    std::string path = (dir / "seqs.jsonl").string();

    RngStream rng(9, 0);
    std::vector<SkeletonSequence> seqs;
    for (int i = 0; i < 5; ++i) seqs.push_back(random_sequence(rng, 6 + i));
    save_jsonl(path, seqs);
    auto back = load_jsonl(path);
    REQUIRE(back.size() == seqs.size());
    for (size_t i = 0; i < seqs.size(); ++i) {
        CHECK(back[i].label == seqs[i].label);
        CHECK(back[i].fps == seqs[i].fps);
        REQUIRE(back[i].num_frames() == seqs[i].num_frames());
        for (int f = 0; f < seqs[i].num_frames(); ++f)
            for (int j = 0; j < kNumJoints; ++j) {
                CHECK(back[i].frames[f].joints[j].x ==
                      doctest::Approx(seqs[i].frames[f].joints[j].x).epsilon(1e-6));
                CHECK(back[i].frames[f].joints[j].z ==
                      doctest::Approx(seqs[i].frames[f].joints[j].z).epsilon(1e-6));
            }
    }
    fs::remove_all(dir);
}
