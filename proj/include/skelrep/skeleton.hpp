#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skelrep/tensor.hpp"

namespace skelrep {

// Canonical 15-joint layout. Order is fixed; everything downstream indexes by it.
enum class JointId : int {
    kHead = 0,
    kNeck,
    kRightShoulder,
    kRightElbow,
    kRightWrist,
    kLeftShoulder,
    kLeftElbow,
    kLeftWrist,
    kRightHip,
    kRightKnee,
    kRightAnkle,
    kLeftHip,
    kLeftKnee,
    kLeftAnkle,
    kTorso,
};

inline constexpr int kNumJoints = 15;
inline constexpr int kWindowFrames = 50;

const std::array<std::string, kNumJoints>& joint_names();
std::optional<JointId> joint_from_name(const std::string& name);

// Double precision so the rigid normalization steps stay isometric well below
// the 1e-9 relative tolerance; file formats store f32.
struct Vec3 {
    double x = 0, y = 0, z = 0;
    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
};

struct SkeletonFrame {
    std::array<Vec3, kNumJoints> joints{};

    Vec3& joint(JointId j) { return joints[static_cast<int>(j)]; }
    const Vec3& joint(JointId j) const { return joints[static_cast<int>(j)]; }
    bool all_zero() const;
};

struct SkeletonSequence {
    std::vector<SkeletonFrame> frames;
    float fps = 30.0f;
    int subject_id = -1;  // -1 = unknown
    int label = -1;       // -1 = unlabeled

    int num_frames() const { return static_cast<int>(frames.size()); }
};

struct Violation {
    std::string message;
    int frame = -1;
    int joint = -1;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Diagnostic only; never throws.
ValidationResult validate_sequence(const SkeletonSequence& seq, int max_label = 59);

// Fixed-length windows with the given stride; metadata copied. Empty when the
// sequence is shorter than `length`.
std::vector<SkeletonSequence> window(const SkeletonSequence& seq, int length, int stride);

// Flatten to a {T,15,3} tensor and back.
Tensor to_tensor(const SkeletonSequence& seq);
SkeletonSequence from_tensor(const Tensor& t, float fps = 30.0f, int label = -1, int subject_id = -1);

struct SkeletonGraph {
    std::vector<std::pair<int, int>> edges;  // 14 undirected pairs
    Tensor adjacency;                        // {15,15}, D^-1/2 (A+I) D^-1/2
};

// The anatomical tree over the 15 joints with symmetric normalization.
SkeletonGraph build_adjacency();

}  // namespace skelrep
