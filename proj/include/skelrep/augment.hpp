#pragma once

#include <array>
#include <string>
#include <vector>

#include "skelrep/rng.hpp"
#include "skelrep/skeleton.hpp"
#include "skelrep/tensor.hpp"

namespace skelrep {

// A view is a fixed 50x15x3 window, double precision so the isometric
// augmentations hold tight tolerances. Cast to float at the encoder boundary.
using View = TensorD;

inline double& view_at(View& v, int f, int j, int c) { return v.data[(static_cast<long>(f) * kNumJoints + j) * 3 + c]; }
inline double view_at(const View& v, int f, int j, int c) { return v.data[(static_cast<long>(f) * kNumJoints + j) * 3 + c]; }

enum class Aug : int {
    kAxisMirror = 0,
    kRandomScale,
    kJointJitter,
    kSlowDown,
    kSpeedUp,
    kFrameDropout,
    kJointDropout,
    kRandomRotation,
};
inline constexpr int kNumAugs = 8;
const std::array<std::string, kNumAugs>& aug_names();

struct AugmentationConfig {
    struct Entry {
        bool enabled = true;
        double probability = 0.0;
    };
    std::array<Entry, kNumAugs> entries;

    double scale_variance = 0.02;
    double jitter_variance = 0.02;
    double slow_down_min = 0.5, slow_down_max = 0.9;
    double speed_up_min = 1.2, speed_up_max = 2.0;
    double frame_dropout_rate = 0.5;
    double joint_dropout_rate = 0.5;
    double rotation_bound = 3.14159265358979323846;

    Entry& entry(Aug a) { return entries[static_cast<int>(a)]; }
    const Entry& entry(Aug a) const { return entries[static_cast<int>(a)]; }
    double effective_probability(Aug a) const {
        const Entry& e = entry(a);
        return e.enabled ? e.probability : 0.0;
    }

    void validate() const;  // throws on out-of-range probabilities/strengths

    // Table-3 probabilities/strengths; random rotation present but disabled.
    static AugmentationConfig baseline();
    // Named profiles: baseline, none, spatial-only, temporal-only,
    // with-rotation, without-<augmentation name>.
    static AugmentationConfig profile(const std::string& name);
    static std::vector<std::string> profile_names();

    static AugmentationConfig load(const std::string& path);
    void save(const std::string& path) const;
};

// Deterministic kernels behind the stochastic ops; used directly by tests.
void mirror_axis(View& v, int axis);
void scale_factors(View& v, const std::array<double, kNumJoints * 3>& factors);
void slow_down_with(View& v, double rate, int window_start);
void speed_up_with(View& v, double rate);
void drop_frames(View& v, const std::vector<int>& frames);
void drop_joints(View& v, const std::array<bool, kNumJoints>& mask);
void rotate_xyz(View& v, double theta_x, double theta_y, double theta_z);

// Stochastic ops; each draws its own trigger from rng and fires when the
// draw is below its probability.
void axis_mirror(View& v, const AugmentationConfig& cfg, RngStream& rng);
void random_scale(View& v, const AugmentationConfig& cfg, RngStream& rng);
void joint_jitter(View& v, const AugmentationConfig& cfg, RngStream& rng);
void slow_down(View& v, const AugmentationConfig& cfg, RngStream& rng);
void speed_up(View& v, const AugmentationConfig& cfg, RngStream& rng);
void frame_dropout(View& v, const AugmentationConfig& cfg, RngStream& rng);
void joint_dropout(View& v, const AugmentationConfig& cfg, RngStream& rng);
void random_rotation(View& v, const AugmentationConfig& cfg, RngStream& rng);

// All eight, in the fixed order mirror, scale, jitter, slow down, speed up,
// frame dropout, joint dropout, rotation.
View apply_stack(const View& v, const AugmentationConfig& cfg, RngStream rng);

// Two views of the same window with distinct stream keys.
std::pair<View, View> make_views(const View& window, const AugmentationConfig& cfg, uint64_t seed, uint64_t epoch,
                                 uint64_t sample);

}  // namespace skelrep
