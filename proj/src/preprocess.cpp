#include "skelrep/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace skelrep {

JointMapping JointMapping::identity() {
    JointMapping m;
    for (int i = 0; i < kNumJoints; ++i) m.sources[i] = {joint_names()[i]};
    return m;
}

JointMapping JointMapping::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open mapping: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    JointMapping m;
    for (auto& [target, srcs] : j.items()) {
        auto id = joint_from_name(target);
        if (!id) throw std::runtime_error("mapping: unknown target joint '" + target + "'");
        auto& entry = m.sources[static_cast<int>(*id)];
        if (!entry.empty()) throw std::runtime_error("mapping: duplicate target '" + target + "'");
        if (srcs.is_string())
            entry = {srcs.get<std::string>()};
        else
            for (auto& s : srcs) entry.push_back(s.get<std::string>());
        if (entry.empty()) throw std::runtime_error("mapping: target '" + target + "' has no sources");
    }
    m.check_complete();
    return m;
}

void JointMapping::save(const std::string& path) const {
    nlohmann::json j;
    for (int i = 0; i < kNumJoints; ++i) j[joint_names()[i]] = sources[i];
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write mapping: " + path);
    os << j.dump(2) << "\n";
}

void JointMapping::check_complete() const {
    for (int i = 0; i < kNumJoints; ++i)
        if (sources[i].empty())
            throw std::runtime_error("mapping: target joint '" + joint_names()[i] + "' is not covered");
}

SkeletonFrame map_joints(const RawFrame& raw, const JointMapping& mapping) {
    mapping.check_complete();
    SkeletonFrame out;
    for (int i = 0; i < kNumJoints; ++i) {
        Vec3 acc{};
        for (const auto& src : mapping.sources[i]) {
            auto it = raw.find(src);
            if (it == raw.end()) throw std::runtime_error("map_joints: missing source joint '" + src + "'");
            acc = acc + it->second;
        }
        out.joints[i] = (1.0 / static_cast<double>(mapping.sources[i].size())) * acc;
    }
    return out;
}

std::pair<SkeletonSequence, float> scale_to_height(const SkeletonSequence& seq) {
    double max_extent = 0.0;
    for (const auto& f : seq.frames) {
        if (f.all_zero()) continue;
        double lo = f.joints[0].z, hi = f.joints[0].z;
        for (const auto& j : f.joints) {
            lo = std::min(lo, j.z);
            hi = std::max(hi, j.z);
        }
        max_extent = std::max(max_extent, hi - lo);
    }
    if (max_extent <= 0.0) throw std::runtime_error("scale_to_height: zero z-extent in every frame");
    double s = 2.0 / max_extent;
    SkeletonSequence out = seq;
    // near-identity scales are skipped so re-normalizing is byte-identical
    if (std::fabs(s - 1.0) > 1e-6)
        for (auto& f : out.frames)
            for (auto& j : f.joints) j = s * j;
    return {out, static_cast<float>(s)};
}

SkeletonFrame center_torso(const SkeletonFrame& frame) {
    SkeletonFrame out = frame;
    Vec3 t = frame.joint(JointId::kTorso);
    for (auto& j : out.joints) j = j - t;
    return out;
}

namespace {

Vec3 rot_z(double theta, Vec3 v) {
    double c = std::cos(theta), s = std::sin(theta);
    return {v.x * c - v.y * s, v.x * s + v.y * c, v.z};
}

Vec3 rot_x(double phi, Vec3 v) {
    double c = std::cos(phi), s = std::sin(phi);
    return {v.x, v.y * c - v.z * s, v.y * s + v.z * c};
}

}  // namespace

FaceCameraResult face_camera(const SkeletonFrame& frame) {
    // The pitch step perturbs the hip alignment the yaw step just produced
    // (and vice versa), so a single yaw+pitch pass is not a projection.
    // Alternate the two steps until both measured angles fall under the snap
    // threshold; the final iteration then applies nothing, which makes
    // re-normalizing an already-normalized frame bitwise idempotent. The
    // threshold also absorbs the angle noise an f32 save/load round-trip
    // introduces (~4e-7), so re-running on written output stays byte-stable.
    constexpr double kSnap = 1e-6;
    constexpr int kMaxIters = 64;

    FaceCameraResult r;
    r.frame = frame;
    double total_yaw = 0.0, total_pitch = 0.0;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        Vec3 hips = r.frame.joint(JointId::kLeftHip) - r.frame.joint(JointId::kRightHip);
        if (hips.x * hips.x + hips.y * hips.y + hips.z * hips.z < 1e-24)
            throw std::runtime_error("face_camera: degenerate pose, hips coincide");
        double yaw = -std::atan2(hips.y, hips.x);
        if (std::fabs(yaw) > kSnap) {
            for (auto& j : r.frame.joints) j = rot_z(yaw, j);
            total_yaw += yaw;
        }

        Vec3 up = r.frame.joint(JointId::kNeck) - r.frame.joint(JointId::kTorso);
        if (up.x * up.x + up.y * up.y + up.z * up.z < 1e-24)
            throw std::runtime_error("face_camera: degenerate pose, neck coincides with torso");
        double pitch = std::atan2(up.y, up.z);
        if (std::fabs(pitch) > kSnap) {
            for (auto& j : r.frame.joints) j = rot_x(pitch, j);
            total_pitch += pitch;
        }

        if (std::fabs(yaw) <= kSnap && std::fabs(pitch) <= kSnap) break;
    }

    r.yaw = static_cast<float>(total_yaw);
    r.pitch = static_cast<float>(total_pitch);
    return r;
}

std::pair<SkeletonSequence, NormalizationReport> normalize_sequence(const SkeletonSequence& seq) {
    // Rotations redistribute each frame's z-extent, so the height reference is
    // measured on the faced frames: center and face first, then scale. On a
    // second pass every rotation snaps to zero and the extent is already
    // exactly 2, which keeps normalization idempotent.
    NormalizationReport rep;
    SkeletonSequence out = seq;
    for (int f = 0; f < out.num_frames(); ++f) {
        if (out.frames[f].all_zero()) {  // dropout sentinel, keep as-is
            rep.yaw.push_back(0);
            rep.pitch.push_back(0);
            continue;
        }
        try {
            auto centered = center_torso(out.frames[f]);
            auto faced = face_camera(centered);
            out.frames[f] = faced.frame;
            rep.yaw.push_back(faced.yaw);
            rep.pitch.push_back(faced.pitch);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("frame " + std::to_string(f) + ": " + e.what());
        }
    }
    auto [scaled, s] = scale_to_height(out);
    rep.scale_factor = s;
    // canonicalize -0.0 (x - x after centering) so serialized output is
    // byte-identical across passes
    for (auto& frame : scaled.frames)
        for (auto& j : frame.joints) {
            j.x += 0.0;
            j.y += 0.0;
            j.z += 0.0;
        }
    return {std::move(scaled), std::move(rep)};
}

std::pair<SkeletonSequence, NormalizationReport> normalize_sequence(const std::vector<RawFrame>& raw_frames,
                                                                    const JointMapping& mapping, float fps,
                                                                    int label, int subject_id) {
    SkeletonSequence seq;
    seq.fps = fps;
    seq.label = label;
    seq.subject_id = subject_id;
    seq.frames.reserve(raw_frames.size());
    for (size_t f = 0; f < raw_frames.size(); ++f) {
        try {
            seq.frames.push_back(map_joints(raw_frames[f], mapping));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("frame " + std::to_string(f) + ": " + e.what());
        }
    }
    return normalize_sequence(seq);
}

}  // namespace skelrep
