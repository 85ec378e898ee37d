#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "skelrep/tensor.hpp"

namespace skelrep {

struct AdamConfig {
    float lr = 0.01f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct AdamState {
    long step = 0;
    std::vector<Tensor> m, v;
};

// Standard Adam with bias correction. State buffers are created lazily to
// match the parameter shapes.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state, const AdamConfig& cfg);

struct LarsConfig {
    float lr = 0.01f;
    float momentum = 0.9f;
    float trust_coefficient = 0.15f;
    float eps = 1e-9f;
};

struct LarsState {
    std::vector<Tensor> velocity;
};

// Layer-wise adaptive scaling: per-tensor local ratio
// trust * ||w|| / (||g|| + eps), falling back to 1 when either norm is zero,
// folded into a momentum buffer with the global scheduled lr.
void lars_momentum_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, LarsState& state,
                        const LarsConfig& cfg);

// Linear warmup to peak over `warmup_epochs`, then cosine decay to zero at
// `total_epochs`.
double lr_schedule(int epoch, int total_epochs, int warmup_epochs, double peak_lr);

}  // namespace skelrep
