#include "skelrep/optim.hpp"

namespace skelrep {

namespace {

void check_finite(const std::vector<Tensor>& params) {
    for (const auto& p : params)
        for (float x : p.data)
            if (!std::isfinite(x)) throw std::runtime_error("optimizer produced a non-finite parameter");
}

void check_shapes(const std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) throw std::invalid_argument("optimizer: params/grads count mismatch");
    for (size_t i = 0; i < params.size(); ++i)
        if (!params[i].same_shape(grads[i])) throw std::invalid_argument("optimizer: grad shape mismatch");
}

}  // namespace

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg) {
    check_shapes(params, grads);
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.shape);
            state.v.emplace_back(p.shape);
        }
    }
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        for (long j = 0; j < params[i].numel(); ++j) {
            float g = grads[i].at(j);
            float& m = state.m[i].at(j);
            float& v = state.v[i].at(j);
            m = cfg.beta1 * m + (1.0f - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0f - cfg.beta2) * g * g;
            double mh = m / bc1;
            double vh = v / bc2;
            params[i].at(j) -= static_cast<float>(cfg.lr * mh / (std::sqrt(vh) + cfg.eps));
        }
    }
    check_finite(params);
}

void lars_momentum_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, LarsState& state,
                        const LarsConfig& cfg) {
    check_shapes(params, grads);
    if (state.velocity.empty())
        for (const auto& p : params) state.velocity.emplace_back(p.shape);
    for (size_t i = 0; i < params.size(); ++i) {
        double wn = 0, gn = 0;
        for (long j = 0; j < params[i].numel(); ++j) {
            wn += static_cast<double>(params[i].at(j)) * params[i].at(j);
            gn += static_cast<double>(grads[i].at(j)) * grads[i].at(j);
        }
        wn = std::sqrt(wn);
        gn = std::sqrt(gn);
        double local = (wn > 0.0 && gn > 0.0) ? cfg.trust_coefficient * wn / (gn + cfg.eps) : 1.0;
        for (long j = 0; j < params[i].numel(); ++j) {
            float& v = state.velocity[i].at(j);
            v = cfg.momentum * v + static_cast<float>(cfg.lr * local * grads[i].at(j));
            params[i].at(j) -= v;
        }
    }
    check_finite(params);
}

double lr_schedule(int epoch, int total_epochs, int warmup_epochs, double peak_lr) {
    if (epoch < 0 || epoch >= total_epochs) throw std::invalid_argument("lr_schedule: epoch out of range");
    if (epoch < warmup_epochs) return peak_lr * static_cast<double>(epoch + 1) / warmup_epochs;
    int span = total_epochs - warmup_epochs;
    if (span <= 0) return peak_lr;
    double t = static_cast<double>(epoch - warmup_epochs) / span;
    return peak_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace skelrep
