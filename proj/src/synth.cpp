#include "skelrep/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "skelrep/rng.hpp"

namespace skelrep {

void SyntheticSpec::validate() const {
    if (num_classes < 2) throw std::invalid_argument("synth: need at least 2 classes");
    if (sequences_per_class < 1 || frames_per_sequence < 1) throw std::invalid_argument("synth: counts must be positive");
    if (!(fps > 0)) throw std::invalid_argument("synth: fps must be positive");
    if (noise_level < 0) throw std::invalid_argument("synth: noise level must be >= 0");
    if (posture_scale < 0) throw std::invalid_argument("synth: posture scale must be >= 0");
    if (!(frequency_min > 0 && frequency_min <= frequency_max)) throw std::invalid_argument("synth: bad frequency range");
}

SkeletonFrame synth_base_pose() {
    using J = JointId;
    SkeletonFrame f;
    auto set = [&f](J j, double x, double y, double z) { f.joint(j) = {x, y, z}; };
    // x: left(+)/right(-), y: forward, z: up
    set(J::kHead, 0.00, 0.0, 1.75);
    set(J::kNeck, 0.00, 0.0, 1.50);
    set(J::kRightShoulder, -0.20, 0.0, 1.45);
    set(J::kRightElbow, -0.26, 0.0, 1.18);
    set(J::kRightWrist, -0.30, 0.0, 0.92);
    set(J::kLeftShoulder, 0.20, 0.0, 1.45);
    set(J::kLeftElbow, 0.26, 0.0, 1.18);
    set(J::kLeftWrist, 0.30, 0.0, 0.92);
    set(J::kRightHip, -0.12, 0.0, 0.95);
    set(J::kRightKnee, -0.14, 0.0, 0.50);
    set(J::kRightAnkle, -0.15, 0.0, 0.06);
    set(J::kLeftHip, 0.12, 0.0, 0.95);
    set(J::kLeftKnee, 0.14, 0.0, 0.50);
    set(J::kLeftAnkle, 0.15, 0.0, 0.06);
    set(J::kTorso, 0.00, 0.0, 1.00);
    return f;
}

namespace {

struct MotionParams {
    double phase, freq, arm_amp, leg_amp, posture_amp, heading, height, offset_x, offset_y;
};

Vec3 yaw_rotate(double theta, Vec3 v) {
    double c = std::cos(theta), s = std::sin(theta);
    return {v.x * c - v.y * s, v.x * s + v.y * c, v.z};
}

// Every class performs the same three oscillations (arm swing, leg swing,
// torso bob) at matched amplitudes; classes differ only in the phase
// relations between the limb oscillators. Per-joint marginal statistics are
// then identical across classes (the global phase is uniform per sequence),
// so telling classes apart requires the coordination structure rather than
// which joints move or how much.
struct Coupling {
    double arm_rel;  // right arm phase lead over left arm
    double leg_rel;  // right leg phase lead over left leg
    double arm_leg;  // leg oscillator lead over the arm oscillator
};

constexpr double kPi = 3.14159265358979323846;

Coupling coupling_for(int family) {
    static const Coupling kTable[] = {
        {kPi, kPi, 0.0},        // contralateral, walk-like
        {0.0, kPi, 0.0},        // arms locked together, legs alternating
        {kPi, 0.0, kPi},        // arms alternating, legs hopping together
        {0.0, 0.0, kPi},        // everything in unison, legs counter-timed
        {kPi / 2, kPi, 0.0},    // arms in quadrature
        {kPi, kPi / 2, kPi / 2},  // legs in quadrature
    };
    return kTable[family % (sizeof(kTable) / sizeof(kTable[0]))];
}

// Besides the couplings each family holds a characteristic static posture for
// the whole sequence: a small class-specific offset pattern. Being constant in
// time it survives resampling and per-frame corruption, which the phase
// couplings alone do not.
void apply_posture(int family, double amount, SkeletonFrame& f) {
    using J = JointId;
    switch (family % 6) {
        case 0:  // arms slightly abducted, chin tucked
            f.joint(J::kLeftWrist).x += amount;
            f.joint(J::kRightWrist).x -= amount;
            f.joint(J::kLeftElbow).x += 0.6 * amount;
            f.joint(J::kRightElbow).x -= 0.6 * amount;
            f.joint(J::kHead).y -= 0.5 * amount;
            break;
        case 1:  // forward lean from the hips
            f.joint(J::kHead).y += amount;
            f.joint(J::kNeck).y += 0.8 * amount;
            f.joint(J::kLeftShoulder).y += 0.7 * amount;
            f.joint(J::kRightShoulder).y += 0.7 * amount;
            f.joint(J::kTorso).y += 0.4 * amount;
            break;
        case 2:  // shallow crouch, knees forward
            f.joint(J::kLeftKnee).y += 0.8 * amount;
            f.joint(J::kRightKnee).y += 0.8 * amount;
            f.joint(J::kLeftHip).z -= 0.5 * amount;
            f.joint(J::kRightHip).z -= 0.5 * amount;
            f.joint(J::kHead).z -= amount;
            f.joint(J::kNeck).z -= 0.7 * amount;
            break;
        case 3:  // shrugged shoulders, elbows out
            f.joint(J::kLeftShoulder).z += 0.8 * amount;
            f.joint(J::kRightShoulder).z += 0.8 * amount;
            f.joint(J::kLeftElbow).x += 0.8 * amount;
            f.joint(J::kRightElbow).x -= 0.8 * amount;
            break;
        case 4:  // narrow stance, head forward
            f.joint(J::kLeftAnkle).x -= 0.7 * amount;
            f.joint(J::kRightAnkle).x += 0.7 * amount;
            f.joint(J::kHead).y += 0.8 * amount;
            break;
        case 5:  // one-sided slump
            f.joint(J::kLeftShoulder).z -= 0.8 * amount;
            f.joint(J::kLeftElbow).z -= 0.5 * amount;
            f.joint(J::kHead).x += 0.6 * amount;
            break;
    }
}

SkeletonFrame motion_frame(int family, double t, const MotionParams& mp) {
    using J = JointId;
    SkeletonFrame f = synth_base_pose();
    apply_posture(family, mp.posture_amp, f);
    Coupling cp = coupling_for(family);
    double theta = 2.0 * kPi * mp.freq * t + mp.phase;

    double arm_l = std::sin(theta);
    double arm_r = std::sin(theta + cp.arm_rel);
    double leg_l = std::sin(theta + cp.arm_leg);
    double leg_r = std::sin(theta + cp.arm_leg + cp.leg_rel);

    f.joint(J::kLeftWrist).y += 0.30 * mp.arm_amp * arm_l;
    f.joint(J::kLeftWrist).z += 0.12 * mp.arm_amp * std::fabs(arm_l);
    f.joint(J::kLeftElbow).y += 0.15 * mp.arm_amp * arm_l;
    f.joint(J::kRightWrist).y += 0.30 * mp.arm_amp * arm_r;
    f.joint(J::kRightWrist).z += 0.12 * mp.arm_amp * std::fabs(arm_r);
    f.joint(J::kRightElbow).y += 0.15 * mp.arm_amp * arm_r;

    f.joint(J::kLeftKnee).y += 0.20 * mp.leg_amp * leg_l;
    f.joint(J::kLeftAnkle).y += 0.30 * mp.leg_amp * leg_l;
    f.joint(J::kLeftAnkle).z += 0.10 * mp.leg_amp * std::max(0.0, leg_l);
    f.joint(J::kRightKnee).y += 0.20 * mp.leg_amp * leg_r;
    f.joint(J::kRightAnkle).y += 0.30 * mp.leg_amp * leg_r;
    f.joint(J::kRightAnkle).z += 0.10 * mp.leg_amp * std::max(0.0, leg_r);

    double bob = 0.02 * std::cos(2.0 * theta);  // common to all classes
    for (auto& j : f.joints) j.z += bob;
    return f;
}

}  // namespace

std::vector<SkeletonSequence> synth_generate(const SyntheticSpec& spec, uint64_t seed) {
    spec.validate();
    std::vector<SkeletonSequence> out;
    out.reserve(static_cast<size_t>(spec.num_classes) * spec.sequences_per_class);
    for (int cls = 0; cls < spec.num_classes; ++cls) {
        for (int idx = 0; idx < spec.sequences_per_class; ++idx) {
            RngStream rng(seed, RngStream::make_key(0x5e9ULL, cls, idx));
            MotionParams mp;
            mp.phase = rng.uniform(0.0, 2.0 * kPi);
            mp.freq = rng.uniform(spec.frequency_min, spec.frequency_max);
            mp.arm_amp = rng.uniform(0.7, 1.3);
            mp.leg_amp = rng.uniform(0.7, 1.3);
            // signed: half the performers hold the mirror-opposite posture, so
            // class means coincide and the posture is not linearly readable
            mp.posture_amp = spec.posture_scale * rng.uniform(0.8, 1.2) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
            mp.heading = rng.uniform(-3.1, 3.1);
            mp.height = rng.uniform(0.9, 1.1);
            mp.offset_x = rng.uniform(-1.0, 1.0);
            mp.offset_y = rng.uniform(-1.0, 1.0);

            SkeletonSequence seq;
            seq.fps = spec.fps;
            seq.label = cls;
            seq.subject_id = cls * spec.sequences_per_class + idx;
            seq.frames.reserve(spec.frames_per_sequence);
            for (int fr = 0; fr < spec.frames_per_sequence; ++fr) {
                double t = fr / static_cast<double>(spec.fps);
                SkeletonFrame f = motion_frame(cls, t, mp);
                for (auto& j : f.joints) {
                    j = mp.height * j;
                    j = yaw_rotate(mp.heading, j);
                    j.x += mp.offset_x;
                    j.y += mp.offset_y;
                    if (spec.noise_level > 0) {
                        j.x += rng.normal(0.0, spec.noise_level);
                        j.y += rng.normal(0.0, spec.noise_level);
                        j.z += rng.normal(0.0, spec.noise_level);
                    }
                }
                seq.frames.push_back(f);
            }
            out.push_back(std::move(seq));
        }
    }
    return out;
}

}  // namespace skelrep
