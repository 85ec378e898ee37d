#include "skelrep/augment.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace skelrep {

const std::array<std::string, kNumAugs>& aug_names() {
    static const std::array<std::string, kNumAugs> names = {
        "axis-mirroring", "random-scale",  "joint-jitter",  "slow-down",
        "speed-up",       "frame-dropout", "joint-dropout", "random-rotation",
    };
    return names;
}

void AugmentationConfig::validate() const {
    for (int i = 0; i < kNumAugs; ++i) {
        double p = entries[i].probability;
        if (p < 0.0 || p > 1.0) throw std::runtime_error("augment config: probability of " + aug_names()[i] + " outside [0,1]");
    }
    if (scale_variance < 0 || jitter_variance < 0) throw std::runtime_error("augment config: variance must be >= 0");
    if (!(slow_down_min > 0 && slow_down_max < 1 && slow_down_min <= slow_down_max))
        throw std::runtime_error("augment config: slow-down range must lie in (0,1)");
    if (!(speed_up_min > 1 && speed_up_min <= speed_up_max))
        throw std::runtime_error("augment config: speed-up range must lie in (1,inf)");
    if (frame_dropout_rate < 0 || frame_dropout_rate > 1 || joint_dropout_rate < 0 || joint_dropout_rate > 1)
        throw std::runtime_error("augment config: dropout rates must lie in [0,1]");
    if (rotation_bound < 0 || rotation_bound > 3.14159265358979323846 + 1e-12)
        throw std::runtime_error("augment config: rotation bound must lie in [0,pi]");
}

AugmentationConfig AugmentationConfig::baseline() {
    AugmentationConfig c;
    c.entry(Aug::kAxisMirror) = {true, 0.5};
    c.entry(Aug::kRandomScale) = {true, 0.7};
    c.entry(Aug::kJointJitter) = {true, 0.5};
    c.entry(Aug::kSlowDown) = {true, 0.5};
    c.entry(Aug::kSpeedUp) = {true, 0.5};
    c.entry(Aug::kFrameDropout) = {true, 0.5};
    c.entry(Aug::kJointDropout) = {true, 0.5};
    c.entry(Aug::kRandomRotation) = {false, 0.6};  // excluded from the baseline profile
    return c;
}

AugmentationConfig AugmentationConfig::profile(const std::string& name) {
    AugmentationConfig c = baseline();
    if (name == "baseline") return c;
    if (name == "none") {
        for (auto& e : c.entries) e.enabled = false;
        return c;
    }
    if (name == "with-rotation") {
        c.entry(Aug::kRandomRotation).enabled = true;
        return c;
    }
    if (name == "spatial-only") {
        c.entry(Aug::kSlowDown).enabled = false;
        c.entry(Aug::kSpeedUp).enabled = false;
        return c;
    }
    if (name == "temporal-only") {
        c.entry(Aug::kAxisMirror).enabled = false;
        c.entry(Aug::kRandomScale).enabled = false;
        c.entry(Aug::kJointJitter).enabled = false;
        c.entry(Aug::kFrameDropout).enabled = false;
        c.entry(Aug::kJointDropout).enabled = false;
        return c;
    }
    if (name.rfind("without-", 0) == 0) {
        std::string aug = name.substr(8);
        for (int i = 0; i < kNumAugs; ++i)
            if (aug_names()[i] == aug) {
                c.entries[i].enabled = false;
                return c;
            }
    }
    throw std::runtime_error("unknown augmentation profile: " + name);
}

std::vector<std::string> AugmentationConfig::profile_names() {
    std::vector<std::string> out = {"baseline", "none", "spatial-only", "temporal-only", "with-rotation"};
    for (const auto& n : aug_names()) out.push_back("without-" + n);
    return out;
}

AugmentationConfig AugmentationConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open profile: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    AugmentationConfig c = baseline();
    for (int i = 0; i < kNumAugs; ++i) {
        if (!j.contains(aug_names()[i])) continue;
        auto& e = j[aug_names()[i]];
        c.entries[i].enabled = e.value("enabled", c.entries[i].enabled);
        c.entries[i].probability = e.value("probability", c.entries[i].probability);
    }
    c.scale_variance = j.value("scale_variance", c.scale_variance);
    c.jitter_variance = j.value("jitter_variance", c.jitter_variance);
    c.slow_down_min = j.value("slow_down_min", c.slow_down_min);
    c.slow_down_max = j.value("slow_down_max", c.slow_down_max);
    c.speed_up_min = j.value("speed_up_min", c.speed_up_min);
    c.speed_up_max = j.value("speed_up_max", c.speed_up_max);
    c.frame_dropout_rate = j.value("frame_dropout_rate", c.frame_dropout_rate);
    c.joint_dropout_rate = j.value("joint_dropout_rate", c.joint_dropout_rate);
    c.rotation_bound = j.value("rotation_bound", c.rotation_bound);
    c.validate();
    return c;
}

void AugmentationConfig::save(const std::string& path) const {
    nlohmann::json j;
    for (int i = 0; i < kNumAugs; ++i) {
        j[aug_names()[i]] = {{"enabled", entries[i].enabled}, {"probability", entries[i].probability}};
    }
    j["scale_variance"] = scale_variance;
    j["jitter_variance"] = jitter_variance;
    j["slow_down_min"] = slow_down_min;
    j["slow_down_max"] = slow_down_max;
    j["speed_up_min"] = speed_up_min;
    j["speed_up_max"] = speed_up_max;
    j["frame_dropout_rate"] = frame_dropout_rate;
    j["joint_dropout_rate"] = joint_dropout_rate;
    j["rotation_bound"] = rotation_bound;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write profile: " + path);
    os << j.dump(2) << "\n";
}

namespace {

void check_view(const View& v) {
    if (v.ndim() != 3 || v.dim(0) != kWindowFrames || v.dim(1) != kNumJoints || v.dim(2) != 3)
        throw std::invalid_argument("augment: view must be {50,15,3}, got " + TensorD::shape_str(v.shape));
}

bool fires(double p, RngStream& rng) { return rng.uniform() < p; }

}  // namespace

void mirror_axis(View& v, int axis) {
    for (int f = 0; f < kWindowFrames; ++f)
        for (int j = 0; j < kNumJoints; ++j) view_at(v, f, j, axis) = -view_at(v, f, j, axis);
}

void scale_factors(View& v, const std::array<double, kNumJoints * 3>& factors) {
    for (int f = 0; f < kWindowFrames; ++f)
        for (int j = 0; j < kNumJoints; ++j)
            for (int c = 0; c < 3; ++c) view_at(v, f, j, c) *= factors[j * 3 + c];
}

void slow_down_with(View& v, double rate, int window_start) {
    View out({kWindowFrames, kNumJoints, 3});
    for (int m = 0; m < kWindowFrames; ++m) {
        // source position of resampled frame (window_start + m); linear
        // interpolation is exact on linear-in-time trajectories
        double p = (window_start + m) * rate;
        if (p > kWindowFrames - 1) p = kWindowFrames - 1;
        int lo = static_cast<int>(p);
        int hi = std::min(lo + 1, kWindowFrames - 1);
        double w = p - lo;
        for (int j = 0; j < kNumJoints; ++j)
            for (int c = 0; c < 3; ++c)
                view_at(out, m, j, c) = (1.0 - w) * view_at(v, lo, j, c) + w * view_at(v, hi, j, c);
    }
    v = std::move(out);
}

void speed_up_with(View& v, double rate) {
    View out({kWindowFrames, kNumJoints, 3});
    int m = 0;
    for (int k = 0;; ++k) {
        int src = static_cast<int>(std::lround(k * rate));
        if (src >= kWindowFrames) break;
        for (int j = 0; j < kNumJoints; ++j)
            for (int c = 0; c < 3; ++c) view_at(out, m, j, c) = view_at(v, src, j, c);
        ++m;
    }
    // remaining frames stay zero (padding)
    v = std::move(out);
}

void drop_frames(View& v, const std::vector<int>& frames) {
    for (int f : frames)
        for (int j = 0; j < kNumJoints; ++j)
            for (int c = 0; c < 3; ++c) view_at(v, f, j, c) = 0.0;
}

void drop_joints(View& v, const std::array<bool, kNumJoints>& mask) {
    for (int f = 0; f < kWindowFrames; ++f)
        for (int j = 0; j < kNumJoints; ++j)
            if (mask[j])
                for (int c = 0; c < 3; ++c) view_at(v, f, j, c) = 0.0;
}

void rotate_xyz(View& v, double tx, double ty, double tz) {
    double cx = std::cos(tx), sx = std::sin(tx);
    double cy = std::cos(ty), sy = std::sin(ty);
    double cz = std::cos(tz), sz = std::sin(tz);
    // R = Rz * Ry * Rx
    double r00 = cz * cy, r01 = cz * sy * sx - sz * cx, r02 = cz * sy * cx + sz * sx;
    double r10 = sz * cy, r11 = sz * sy * sx + cz * cx, r12 = sz * sy * cx - cz * sx;
    double r20 = -sy, r21 = cy * sx, r22 = cy * cx;
    for (int f = 0; f < kWindowFrames; ++f)
        for (int j = 0; j < kNumJoints; ++j) {
            double x = view_at(v, f, j, 0), y = view_at(v, f, j, 1), z = view_at(v, f, j, 2);
            view_at(v, f, j, 0) = r00 * x + r01 * y + r02 * z;
            view_at(v, f, j, 1) = r10 * x + r11 * y + r12 * z;
            view_at(v, f, j, 2) = r20 * x + r21 * y + r22 * z;
        }
}

void axis_mirror(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kAxisMirror), rng)) return;
    mirror_axis(v, static_cast<int>(rng.uniform_int(3)));
}

void random_scale(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kRandomScale), rng)) return;
    std::array<double, kNumJoints * 3> factors;
    double sigma = std::sqrt(cfg.scale_variance);
    for (auto& f : factors) f = 1.0 + rng.normal(0.0, sigma);
    scale_factors(v, factors);
}

void joint_jitter(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kJointJitter), rng)) return;
    double sigma = std::sqrt(cfg.jitter_variance);
    for (auto& x : v.data) x += rng.normal(0.0, sigma);
}

void slow_down(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kSlowDown), rng)) return;
    double rate = rng.uniform(cfg.slow_down_min, cfg.slow_down_max);
    int resampled = static_cast<int>(std::ceil(kWindowFrames / rate));
    int start = static_cast<int>(rng.uniform_int(std::max(1, resampled - kWindowFrames + 1)));
    slow_down_with(v, rate, start);
}

void speed_up(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kSpeedUp), rng)) return;
    speed_up_with(v, rng.uniform(cfg.speed_up_min, cfg.speed_up_max));
}

void frame_dropout(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kFrameDropout), rng)) return;
    std::vector<int> dropped;
    for (int f = 0; f < kWindowFrames; ++f)
        if (rng.uniform() < cfg.frame_dropout_rate) dropped.push_back(f);
    drop_frames(v, dropped);
}

void joint_dropout(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kJointDropout), rng)) return;
    std::array<bool, kNumJoints> mask{};
    for (int j = 0; j < kNumJoints; ++j) mask[j] = rng.uniform() < cfg.joint_dropout_rate;
    drop_joints(v, mask);
}

void random_rotation(View& v, const AugmentationConfig& cfg, RngStream& rng) {
    if (!fires(cfg.effective_probability(Aug::kRandomRotation), rng)) return;
    double b = cfg.rotation_bound;
    double tx = rng.uniform(-b, b), ty = rng.uniform(-b, b), tz = rng.uniform(-b, b);
    rotate_xyz(v, tx, ty, tz);
}

View apply_stack(const View& v, const AugmentationConfig& cfg, RngStream rng) {
    check_view(v);
    View out = v;
    axis_mirror(out, cfg, rng);
    random_scale(out, cfg, rng);
    joint_jitter(out, cfg, rng);
    slow_down(out, cfg, rng);
    speed_up(out, cfg, rng);
    frame_dropout(out, cfg, rng);
    joint_dropout(out, cfg, rng);
    random_rotation(out, cfg, rng);
    return out;
}

std::pair<View, View> make_views(const View& window, const AugmentationConfig& cfg, uint64_t seed, uint64_t epoch,
                                 uint64_t sample) {
    RngStream rng_a(seed, RngStream::make_key(epoch, sample, 0));
    RngStream rng_b(seed, RngStream::make_key(epoch, sample, 1));
    return {apply_stack(window, cfg, rng_a), apply_stack(window, cfg, rng_b)};
}

}  // namespace skelrep
