#include "skelrep/skeleton.hpp"

#include <cmath>
#include <sstream>

namespace skelrep {

const std::array<std::string, kNumJoints>& joint_names() {
    static const std::array<std::string, kNumJoints> names = {
        "head",       "neck",           "right_shoulder", "right_elbow", "right_wrist",
        "left_shoulder", "left_elbow",  "left_wrist",     "right_hip",   "right_knee",
        "right_ankle", "left_hip",      "left_knee",      "left_ankle",  "torso",
    };
    return names;
}

std::optional<JointId> joint_from_name(const std::string& name) {
    const auto& names = joint_names();
    for (int i = 0; i < kNumJoints; ++i)
        if (names[i] == name) return static_cast<JointId>(i);
    return std::nullopt;
}

bool SkeletonFrame::all_zero() const {
    for (const auto& j : joints)
        if (j.x != 0.0f || j.y != 0.0f || j.z != 0.0f) return false;
    return true;
}

ValidationResult validate_sequence(const SkeletonSequence& seq, int max_label) {
    ValidationResult r;
    if (seq.frames.empty()) r.violations.push_back({"frames must be non-empty"});
    if (!(seq.fps > 0.0f)) r.violations.push_back({"fps must be positive"});
    if (seq.label < -1 || seq.label > max_label) {
        std::ostringstream os;
        os << "label " << seq.label << " outside [0," << max_label << "]";
        r.violations.push_back({os.str()});
    }
    for (int f = 0; f < seq.num_frames(); ++f) {
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& p = seq.frames[f].joints[j];
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
                std::ostringstream os;
                os << "non-finite coordinate at frame " << f << " joint " << joint_names()[j];
                r.violations.push_back({os.str(), f, j});
            }
        }
    }
    return r;
}

std::vector<SkeletonSequence> window(const SkeletonSequence& seq, int length, int stride) {
    if (length < 1 || stride < 1) throw std::invalid_argument("window: length and stride must be >= 1");
    std::vector<SkeletonSequence> out;
    int T = seq.num_frames();
    if (T < length) return out;
    int count = (T - length) / stride + 1;
    out.reserve(count);
    for (int w = 0; w < count; ++w) {
        SkeletonSequence s;
        s.fps = seq.fps;
        s.subject_id = seq.subject_id;
        s.label = seq.label;
        s.frames.assign(seq.frames.begin() + static_cast<long>(w) * stride,
                        seq.frames.begin() + static_cast<long>(w) * stride + length);
        out.push_back(std::move(s));
    }
    return out;
}

Tensor to_tensor(const SkeletonSequence& seq) {
    Tensor t({seq.num_frames(), kNumJoints, 3});
    long i = 0;
    for (const auto& f : seq.frames)
        for (const auto& j : f.joints) {
            t.at(i++) = j.x;
            t.at(i++) = j.y;
            t.at(i++) = j.z;
        }
    return t;
}

SkeletonSequence from_tensor(const Tensor& t, float fps, int label, int subject_id) {
    if (t.ndim() != 3 || t.dim(1) != kNumJoints || t.dim(2) != 3)
        throw std::invalid_argument("from_tensor: expected {T,15,3}, got " + Tensor::shape_str(t.shape));
    SkeletonSequence s;
    s.fps = fps;
    s.label = label;
    s.subject_id = subject_id;
    s.frames.resize(t.dim(0));
    long i = 0;
    for (auto& f : s.frames)
        for (auto& j : f.joints) {
            j.x = t.at(i++);
            j.y = t.at(i++);
            j.z = t.at(i++);
        }
    return s;
}

SkeletonGraph build_adjacency() {
    using J = JointId;
    auto e = [](J a, J b) { return std::make_pair(static_cast<int>(a), static_cast<int>(b)); };
    SkeletonGraph g;
    g.edges = {
        e(J::kHead, J::kNeck),
        e(J::kNeck, J::kRightShoulder),
        e(J::kNeck, J::kLeftShoulder),
        e(J::kRightShoulder, J::kRightElbow),
        e(J::kRightElbow, J::kRightWrist),
        e(J::kLeftShoulder, J::kLeftElbow),
        e(J::kLeftElbow, J::kLeftWrist),
        e(J::kNeck, J::kTorso),
        e(J::kTorso, J::kRightHip),
        e(J::kTorso, J::kLeftHip),
        e(J::kRightHip, J::kRightKnee),
        e(J::kRightKnee, J::kRightAnkle),
        e(J::kLeftHip, J::kLeftKnee),
        e(J::kLeftKnee, J::kLeftAnkle),
    };
    Tensor a({kNumJoints, kNumJoints});
    for (int i = 0; i < kNumJoints; ++i) a.at(i, i) = 1.0f;  // self-loops
    for (auto [i, j] : g.edges) {
        a.at(i, j) = 1.0f;
        a.at(j, i) = 1.0f;
    }
    std::array<float, kNumJoints> dinv{};
    for (int i = 0; i < kNumJoints; ++i) {
        float deg = 0;
        for (int j = 0; j < kNumJoints; ++j) deg += a.at(i, j);
        dinv[i] = 1.0f / std::sqrt(deg);
    }
    g.adjacency = Tensor({kNumJoints, kNumJoints});
    for (int i = 0; i < kNumJoints; ++i)
        for (int j = 0; j < kNumJoints; ++j) g.adjacency.at(i, j) = dinv[i] * a.at(i, j) * dinv[j];
    return g;
}

}  // namespace skelrep
