#pragma once

#include <string>
#include <vector>

#include "skelrep/contrastive.hpp"
#include "skelrep/encoders.hpp"
#include "skelrep/optim.hpp"
#include "skelrep/rng.hpp"
#include "skelrep/skeleton.hpp"

namespace skelrep {

enum class TaskKind { kReconstruction, kMotionPrediction, kClassification };

std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

struct TaskSpec {
    TaskKind kind = TaskKind::kClassification;
    bool finetune = false;
    int epochs = 200;
    int batch = 128;
    AdamConfig adam;  // lr 0.01
    int num_classes = 0;                                  // classification
    std::vector<int> head_widths = {128, 512, 1024, 2250};  // regression decoder
    double corruption_rate = 0.8;
    bool euclidean_mae = false;  // per-joint Euclidean norm instead of per-coordinate
};

struct TaskReport {
    std::string task;
    std::string mode;     // frozen | finetune
    double metric = 0;    // MAE mm or accuracy %
    double std_dev = 0;   // filled by multi-seed aggregation
    std::string profile;
    uint64_t seed = 0;
    int epochs = 0;
    long head_params = 0;
    long trained_params = 0;

    std::string to_json() const;
};

// Zeroes exactly round(rate * T) distinct frames, chosen uniformly without
// replacement. The uncorrupted window is the regression target.
Tensor corrupt_for_reconstruction(const Tensor& window, double rate, RngStream& rng);

// Mean absolute per-coordinate error in millimetres (1 normalized unit = 1 m
// under the 2 m-tall convention); euclidean variant averages per-joint norms.
double mae_mm(const Tensor& pred, const Tensor& target, bool euclidean = false);

struct DownstreamData {
    std::vector<Tensor> inputs;   // encoder inputs, {50,15,3}
    std::vector<Tensor> targets;  // flattened {2250} regression targets
    std::vector<int> labels;      // classification labels
};

DownstreamData make_reconstruction_data(const std::vector<Tensor>& windows, double rate, uint64_t seed);
// Pairs window [t, t+50) with target [t+50, t+100) from each source sequence.
DownstreamData make_motion_prediction_data(const std::vector<SkeletonSequence>& sequences, int stride);
DownstreamData make_classification_data(const std::vector<Tensor>& windows, const std::vector<int>& labels);

struct HeadModel {
    TaskKind kind;
    std::vector<NamedTensor> params;
};

std::vector<NamedTensor> init_head_params(const TaskSpec& spec, uint64_t seed);

// Frozen mode trains only the head on cached features; finetune updates the
// encoder jointly through per-sample tapes.
struct TrainHeadResult {
    HeadModel head;
    std::vector<double> epoch_loss;
};
TrainHeadResult train_head(const TaskSpec& spec, std::vector<NamedTensor>& encoder, const EncoderPlan& plan,
                           const DownstreamData& train, uint64_t seed);

double evaluate(const TaskSpec& spec, const std::vector<NamedTensor>& encoder, const EncoderPlan& plan,
                const HeadModel& head, const DownstreamData& test);

// Head forward on a feature batch {B,128}; returns output node.
template <class T>
int head_forward(Tape<T>& tape, int features, const TaskSpec& spec, const std::vector<int>& param_nodes) {
    if (spec.kind == TaskKind::kClassification)
        return tape.add_bias(tape.matmul(features, param_nodes[0]), param_nodes[1]);
    int x = features;
    size_t n_layers = spec.head_widths.size() - 1;
    for (size_t i = 0; i < n_layers; ++i) {
        x = tape.add_bias(tape.matmul(x, param_nodes[2 * i]), param_nodes[2 * i + 1]);
        if (i + 1 < n_layers) x = tape.relu(x);
    }
    return x;
}

// mean over rows of (logsumexp(logits) - logit[label])
template <class T>
int cross_entropy(Tape<T>& tape, int logits, const std::vector<int>& labels) {
    int lse = tape.logsumexp_rows(logits);
    int picked = tape.gather_cols(logits, labels);
    return tape.mean(tape.sub(lse, picked));
}

template <class T>
int mse(Tape<T>& tape, int pred, int target) {
    int d = tape.sub(pred, target);
    return tape.mean(tape.mul(d, d));
}

}  // namespace skelrep
