#pragma once

#include <string>
#include <vector>

#include "skelrep/checkpoint.hpp"
#include "skelrep/skeleton.hpp"
#include "skelrep/tape.hpp"

namespace skelrep {

enum class EncoderKind { kStgcn, kMlp };

std::string encoder_kind_name(EncoderKind k);
EncoderKind encoder_kind_from_name(const std::string& name);

// Desk-scale plans: 3 ST-GCN blocks (channels 3->32->64->128, temporal kernel
// 9, stride doubling on blocks 2 and 3) or an MLP over the flattened window.
// Both end in a 128-d feature.
struct EncoderPlan {
    EncoderKind kind = EncoderKind::kStgcn;
    std::vector<int> channels = {3, 32, 64, 128};
    std::vector<int> strides = {1, 2, 2};
    int temporal_kernel = 9;
    int feature_size = 128;
    std::vector<int> mlp_widths = {kWindowFrames * kNumJoints * 3, 512, 256, 128};

    static EncoderPlan stgcn();
    static EncoderPlan mlp();
    std::string to_json() const;
    static EncoderPlan from_json(const std::string& text);
    bool operator==(const EncoderPlan&) const = default;
};

struct ProjectionPlan {
    int input = 128;
    int hidden = 256;
    int output = 128;
};

// Seeded Kaiming-style fan-in uniform init; biases zero.
std::vector<NamedTensor> init_encoder_params(const EncoderPlan& plan, uint64_t seed);
std::vector<NamedTensor> init_projection_params(const ProjectionPlan& plan, uint64_t seed);

long total_params(const std::vector<NamedTensor>& params);

// Pushes every parameter onto the tape as a grad-carrying leaf, in order.
template <class T>
std::vector<int> push_params(Tape<T>& tape, const std::vector<NamedTensor>& params) {
    std::vector<int> ids;
    ids.reserve(params.size());
    for (const auto& p : params) ids.push_back(tape.leaf(p.value.template cast<T>()));
    return ids;
}

// view_node: {50,15,3}; returns a {1,128} feature node.
template <class T>
int encoder_forward(Tape<T>& tape, int view_node, const EncoderPlan& plan, const std::vector<int>& param_nodes,
                    int adjacency_node);

// views_node: `batch` stacked windows {batch*50,15,3}; returns {batch,128}.
template <class T>
int encoder_forward_batched(Tape<T>& tape, int views_node, int batch, const EncoderPlan& plan,
                            const std::vector<int>& param_nodes, int adjacency_node);

// h: {1,128} (or {B,128}); returns {B,128} projection.
template <class T>
int projection_forward(Tape<T>& tape, int h, const std::vector<int>& param_nodes);

// ---- implementation ----

template <class T>
int encoder_forward_batched(Tape<T>& tape, int views_node, int batch, const EncoderPlan& plan,
                            const std::vector<int>& param_nodes, int adjacency_node) {
    if (plan.kind == EncoderKind::kMlp) {
        int x = tape.reshape(views_node, {batch, plan.mlp_widths.front()});
        size_t n_layers = plan.mlp_widths.size() - 1;
        for (size_t i = 0; i < n_layers; ++i) {
            x = tape.add_bias(tape.matmul(x, param_nodes[2 * i]), param_nodes[2 * i + 1]);
            if (i + 1 < n_layers) x = tape.relu(x);
        }
        return x;
    }
    int x = views_node;
    size_t p = 0;
    for (size_t b = 0; b + 1 < plan.channels.size(); ++b) {
        int s = tape.batched_matmul(adjacency_node, x);
        s = tape.add_bias(tape.batched_matmul(s, param_nodes[p]), param_nodes[p + 1]);
        s = tape.relu(s);
        s = tape.add_bias(tape.temporal_conv_batched(s, param_nodes[p + 2], plan.strides[b], batch), param_nodes[p + 3]);
        x = tape.relu(s);
        p += 4;
    }
    const auto& shp = tape.value(x).shape;
    int pooled = tape.mean_rows_grouped(tape.reshape(x, {shp[0] * shp[1], shp[2]}), shp[0] / batch * shp[1]);
    return tape.add_bias(tape.matmul(pooled, param_nodes[p]), param_nodes[p + 1]);
}

template <class T>
int encoder_forward(Tape<T>& tape, int view_node, const EncoderPlan& plan, const std::vector<int>& param_nodes,
                    int adjacency_node) {
    return encoder_forward_batched(tape, view_node, 1, plan, param_nodes, adjacency_node);
}

template <class T>
int projection_forward(Tape<T>& tape, int h, const std::vector<int>& param_nodes) {
    int x = tape.relu(tape.add_bias(tape.matmul(h, param_nodes[0]), param_nodes[1]));
    x = tape.relu(tape.add_bias(tape.matmul(x, param_nodes[2]), param_nodes[3]));
    return tape.add_bias(tape.matmul(x, param_nodes[4]), param_nodes[5]);
}

}  // namespace skelrep
