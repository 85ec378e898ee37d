#include "skelrep/encoders.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "skelrep/rng.hpp"

namespace skelrep {

std::string encoder_kind_name(EncoderKind k) { return k == EncoderKind::kStgcn ? "stgcn" : "mlp"; }

EncoderKind encoder_kind_from_name(const std::string& name) {
    if (name == "stgcn") return EncoderKind::kStgcn;
    if (name == "mlp") return EncoderKind::kMlp;
    throw std::runtime_error("unknown encoder kind: " + name);
}

EncoderPlan EncoderPlan::stgcn() { return EncoderPlan{}; }

EncoderPlan EncoderPlan::mlp() {
    EncoderPlan p;
    p.kind = EncoderKind::kMlp;
    return p;
}

std::string EncoderPlan::to_json() const {
    nlohmann::json j;
    j["kind"] = encoder_kind_name(kind);
    j["channels"] = channels;
    j["strides"] = strides;
    j["temporal_kernel"] = temporal_kernel;
    j["feature_size"] = feature_size;
    j["mlp_widths"] = mlp_widths;
    return j.dump();
}

EncoderPlan EncoderPlan::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    EncoderPlan p;
    p.kind = encoder_kind_from_name(j.at("kind").get<std::string>());
    p.channels = j.at("channels").get<std::vector<int>>();
    p.strides = j.at("strides").get<std::vector<int>>();
    p.temporal_kernel = j.at("temporal_kernel").get<int>();
    p.feature_size = j.at("feature_size").get<int>();
    p.mlp_widths = j.at("mlp_widths").get<std::vector<int>>();
    return p;
}

namespace {

Tensor kaiming_uniform(std::vector<int> shape, int fan_in, RngStream& rng) {
    Tensor t(std::move(shape));
    double bound = std::sqrt(6.0 / fan_in);
    for (auto& x : t.data) x = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

}  // namespace

std::vector<NamedTensor> init_encoder_params(const EncoderPlan& plan, uint64_t seed) {
    RngStream rng(seed, RngStream::make_key(0x1217ULL, 0, 0));
    std::vector<NamedTensor> out;
    if (plan.kind == EncoderKind::kMlp) {
        for (size_t i = 0; i + 1 < plan.mlp_widths.size(); ++i) {
            int in = plan.mlp_widths[i], to = plan.mlp_widths[i + 1];
            out.push_back({"mlp" + std::to_string(i) + ".w", kaiming_uniform({in, to}, in, rng)});
            out.push_back({"mlp" + std::to_string(i) + ".b", Tensor({to})});
        }
        return out;
    }
    for (size_t b = 0; b + 1 < plan.channels.size(); ++b) {
        int cin = plan.channels[b], cout = plan.channels[b + 1];
        std::string prefix = "block" + std::to_string(b);
        out.push_back({prefix + ".spatial.w", kaiming_uniform({cin, cout}, cin, rng)});
        out.push_back({prefix + ".spatial.b", Tensor({cout})});
        out.push_back({prefix + ".temporal.w",
                       kaiming_uniform({plan.temporal_kernel, cout, cout}, plan.temporal_kernel * cout, rng)});
        out.push_back({prefix + ".temporal.b", Tensor({cout})});
    }
    int clast = plan.channels.back();
    out.push_back({"head.w", kaiming_uniform({clast, plan.feature_size}, clast, rng)});
    out.push_back({"head.b", Tensor({plan.feature_size})});
    return out;
}

std::vector<NamedTensor> init_projection_params(const ProjectionPlan& plan, uint64_t seed) {
    RngStream rng(seed, RngStream::make_key(0x9707ULL, 0, 0));
    std::vector<NamedTensor> out;
    const int widths[4] = {plan.input, plan.hidden, plan.hidden, plan.output};
    for (int i = 0; i < 3; ++i) {
        out.push_back({"proj" + std::to_string(i) + ".w", kaiming_uniform({widths[i], widths[i + 1]}, widths[i], rng)});
        out.push_back({"proj" + std::to_string(i) + ".b", Tensor({widths[i + 1]})});
    }
    return out;
}

long total_params(const std::vector<NamedTensor>& params) {
    long n = 0;
    for (const auto& p : params) n += p.value.numel();
    return n;
}

}  // namespace skelrep
