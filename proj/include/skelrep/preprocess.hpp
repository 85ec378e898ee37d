#pragma once

#include <map>
#include <string>
#include <vector>

#include "skelrep/skeleton.hpp"

namespace skelrep {

// Raw ingestion payload: named 3D joints already in global coordinates.
using RawFrame = std::map<std::string, Vec3>;

// Maps source joint names onto the 15 canonical joints. A target backed by
// several sources becomes their mean (e.g. torso from two spine joints).
struct JointMapping {
    std::array<std::vector<std::string>, kNumJoints> sources;

    static JointMapping identity();
    static JointMapping load(const std::string& path);  // JSON: {"torso": ["spine1","spine2"], ...}
    void save(const std::string& path) const;
    void check_complete() const;  // throws on uncovered target
};

struct NormalizationReport {
    float scale_factor = 1.0f;
    std::vector<float> yaw;    // radians per frame, (-pi, pi]
    std::vector<float> pitch;  // radians per frame
};

SkeletonFrame map_joints(const RawFrame& raw, const JointMapping& mapping);

// Single scale factor s = 2 / max over frames of per-frame z-extent, applied
// to every coordinate so bone-length ratios are preserved.
std::pair<SkeletonSequence, float> scale_to_height(const SkeletonSequence& seq);

SkeletonFrame center_torso(const SkeletonFrame& frame);

// Rotates about z so left_hip - right_hip lies on +x, then about x so
// neck - torso projects onto +z in the y-z plane. Returns (frame, yaw, pitch).
struct FaceCameraResult {
    SkeletonFrame frame;
    float yaw = 0, pitch = 0;
};
FaceCameraResult face_camera(const SkeletonFrame& frame);

// map -> center per frame -> face per frame -> scale once per sequence (the
// height reference is measured on the faced frames so re-normalizing is a
// no-op). All-zero (dropped) frames pass through untouched.
std::pair<SkeletonSequence, NormalizationReport> normalize_sequence(const SkeletonSequence& seq);
std::pair<SkeletonSequence, NormalizationReport> normalize_sequence(const std::vector<RawFrame>& raw_frames,
                                                                    const JointMapping& mapping, float fps,
                                                                    int label = -1, int subject_id = -1);

}  // namespace skelrep
