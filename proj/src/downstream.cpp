#include "skelrep/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace skelrep {

std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::kReconstruction: return "reconstruction";
        case TaskKind::kMotionPrediction: return "motion-prediction";
        case TaskKind::kClassification: return "classification";
    }
    return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "reconstruction") return TaskKind::kReconstruction;
    if (name == "motion-prediction") return TaskKind::kMotionPrediction;
    if (name == "classification") return TaskKind::kClassification;
    throw std::runtime_error("unknown task: " + name);
}

std::string TaskReport::to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["mode"] = mode;
    j["metric"] = metric;
    j["std"] = std_dev;
    j["profile"] = profile;
    j["seed"] = seed;
    j["epochs"] = epochs;
    j["head_params"] = head_params;
    j["trained_params"] = trained_params;
    return j.dump();
}

Tensor corrupt_for_reconstruction(const Tensor& window, double rate, RngStream& rng) {
    if (window.ndim() != 3 || window.dim(1) != kNumJoints || window.dim(2) != 3)
        throw std::invalid_argument("corrupt: window must be {T,15,3}");
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("corrupt: rate must lie in [0,1]");
    int frames = window.dim(0);
    int drop = static_cast<int>(std::lround(rate * frames));
    std::vector<int> idx(frames);
    for (int i = 0; i < frames; ++i) idx[i] = i;
    for (int i = 0; i < drop; ++i) {
        int j = i + static_cast<int>(rng.uniform_int(frames - i));
        std::swap(idx[i], idx[j]);
    }
    Tensor out = window;
    long per_frame = static_cast<long>(kNumJoints) * 3;
    for (int i = 0; i < drop; ++i)
        for (long c = 0; c < per_frame; ++c) out.at(idx[i] * per_frame + c) = 0.0f;
    return out;
}

double mae_mm(const Tensor& pred, const Tensor& target, bool euclidean) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("mae_mm: shape mismatch " + Tensor::shape_str(pred.shape) + " vs " +
                                    Tensor::shape_str(target.shape));
    if (pred.numel() % 3 != 0) throw std::invalid_argument("mae_mm: expected xyz triples");
    double acc = 0;
    if (euclidean) {
        long joints = pred.numel() / 3;
        for (long i = 0; i < joints; ++i) {
            double dx = pred.at(3 * i) - target.at(3 * i);
            double dy = pred.at(3 * i + 1) - target.at(3 * i + 1);
            double dz = pred.at(3 * i + 2) - target.at(3 * i + 2);
            acc += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
        return acc / joints * 1000.0;
    }
    for (long i = 0; i < pred.numel(); ++i) acc += std::abs(static_cast<double>(pred.at(i)) - target.at(i));
    return acc / pred.numel() * 1000.0;
}

DownstreamData make_reconstruction_data(const std::vector<Tensor>& windows, double rate, uint64_t seed) {
    DownstreamData d;
    for (size_t i = 0; i < windows.size(); ++i) {
        RngStream rng(seed, RngStream::make_key(0xc0ffULL, i, 0));
        d.inputs.push_back(corrupt_for_reconstruction(windows[i], rate, rng));
        d.targets.push_back(Tensor({static_cast<int>(windows[i].numel())}, windows[i].data));
    }
    return d;
}

DownstreamData make_motion_prediction_data(const std::vector<SkeletonSequence>& sequences, int stride) {
    DownstreamData d;
    for (const auto& seq : sequences) {
        int T = seq.num_frames();
        for (int t = 0; t + 2 * kWindowFrames <= T; t += stride) {
            SkeletonSequence in, tgt;
            in.frames.assign(seq.frames.begin() + t, seq.frames.begin() + t + kWindowFrames);
            tgt.frames.assign(seq.frames.begin() + t + kWindowFrames, seq.frames.begin() + t + 2 * kWindowFrames);
            Tensor ti = to_tensor(in), tt = to_tensor(tgt);
            d.inputs.push_back(ti);
            d.targets.push_back(Tensor({static_cast<int>(tt.numel())}, tt.data));
        }
    }
    return d;
}

DownstreamData make_classification_data(const std::vector<Tensor>& windows, const std::vector<int>& labels) {
    if (windows.size() != labels.size()) throw std::invalid_argument("classification data: label count mismatch");
    for (int l : labels)
        if (l < 0) throw std::runtime_error("classification task requires labels on every window");
    DownstreamData d;
    d.inputs = windows;
    d.labels = labels;
    return d;
}

std::vector<NamedTensor> init_head_params(const TaskSpec& spec, uint64_t seed) {
    RngStream rng(seed, RngStream::make_key(0x4eadULL, 0, 0));
    std::vector<NamedTensor> out;
    auto kaiming = [&rng](std::vector<int> shape, int fan_in) {
        Tensor t(std::move(shape));
        double bound = std::sqrt(6.0 / fan_in);
        for (auto& x : t.data) x = static_cast<float>(rng.uniform(-bound, bound));
        return t;
    };
    if (spec.kind == TaskKind::kClassification) {
        if (spec.num_classes < 2) throw std::invalid_argument("classification head: num_classes must be >= 2");
        out.push_back({"head0.w", kaiming({128, spec.num_classes}, 128)});
        out.push_back({"head0.b", Tensor({spec.num_classes})});
        return out;
    }
    for (size_t i = 0; i + 1 < spec.head_widths.size(); ++i) {
        int in = spec.head_widths[i], to = spec.head_widths[i + 1];
        out.push_back({"head" + std::to_string(i) + ".w", kaiming({in, to}, in)});
        out.push_back({"head" + std::to_string(i) + ".b", Tensor({to})});
    }
    return out;
}

namespace {

// Cached encoder features, {N,128}.
Tensor encode_all(const std::vector<Tensor>& inputs, const std::vector<NamedTensor>& encoder,
                  const EncoderPlan& plan) {
    int n = static_cast<int>(inputs.size());
    Tensor h({n, plan.feature_size});
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        Tensor f = encode_window(inputs[i], encoder, plan);
        for (int c = 0; c < plan.feature_size; ++c) h.at(i, c) = f.at(c);
    }
    return h;
}

}  // namespace

TrainHeadResult train_head(const TaskSpec& spec, std::vector<NamedTensor>& encoder, const EncoderPlan& plan,
                           const DownstreamData& train, uint64_t seed) {
    if (train.inputs.empty()) throw std::invalid_argument("train_head: empty training set");
    if (spec.kind == TaskKind::kClassification && train.labels.empty())
        throw std::runtime_error("classification task requires labels");

    TrainHeadResult result;
    result.head.kind = spec.kind;
    result.head.params = init_head_params(spec, seed);
    int n = static_cast<int>(train.inputs.size());

    std::vector<Tensor> params;
    for (const auto& p : result.head.params) params.push_back(p.value);
    size_t n_head = params.size();
    if (spec.finetune)
        for (const auto& p : encoder) params.push_back(p.value);
    AdamState adam_state;

    Tensor cached;
    if (!spec.finetune) cached = encode_all(train.inputs, encoder, plan);
    SkeletonGraph graph = build_adjacency();

    std::vector<int> order(n);
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        for (int i = 0; i < n; ++i) order[i] = i;
        RngStream shuffle_rng(seed, RngStream::make_key(0xd0e5ULL + epoch, 0, 0));
        for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        double loss_sum = 0;
        int batch_count = 0;
        for (int start = 0; start < n; start += spec.batch) {
            int bsz = std::min(spec.batch, n - start);

            // features for this batch
            Tensor h({bsz, plan.feature_size});
            std::vector<TapeF> sample_tapes;
            std::vector<std::vector<int>> sample_enc_ids;
            std::vector<int> sample_h_nodes;
            if (spec.finetune) {
                sample_tapes.resize(bsz);
                sample_enc_ids.resize(bsz);
                sample_h_nodes.resize(bsz);
                std::vector<NamedTensor> enc_now = encoder;
                for (size_t k = 0; k < enc_now.size(); ++k) enc_now[k].value = params[n_head + k];
#pragma omp parallel for schedule(dynamic)
                for (int s = 0; s < bsz; ++s) {
                    TapeF& t = sample_tapes[s];
                    sample_enc_ids[s] = push_params(t, enc_now);
                    int adj = t.constant(graph.adjacency);
                    int v = t.leaf(train.inputs[order[start + s]], false);
                    sample_h_nodes[s] = encoder_forward(t, v, plan, sample_enc_ids[s], adj);
                    const Tensor& hv = t.value(sample_h_nodes[s]);
                    for (int c = 0; c < plan.feature_size; ++c) h.at(s, c) = hv.at(0, c);
                }
            } else {
                for (int s = 0; s < bsz; ++s)
                    for (int c = 0; c < plan.feature_size; ++c) h.at(s, c) = cached.at(order[start + s], c);
            }

            // loss tape: head on top of the feature batch
            TapeF t;
            int h_leaf = t.leaf(h);
            std::vector<int> head_ids;
            for (size_t k = 0; k < n_head; ++k) head_ids.push_back(t.leaf(params[k]));
            int out = head_forward(t, h_leaf, spec, head_ids);
            int loss_node;
            if (spec.kind == TaskKind::kClassification) {
                std::vector<int> labels(bsz);
                for (int s = 0; s < bsz; ++s) labels[s] = train.labels[order[start + s]];
                loss_node = cross_entropy(t, out, labels);
            } else {
                Tensor target({bsz, static_cast<int>(train.targets[0].numel())});
                for (int s = 0; s < bsz; ++s) {
                    const Tensor& tv = train.targets[order[start + s]];
                    for (long c = 0; c < tv.numel(); ++c) target.at(static_cast<long>(s) * tv.numel() + c) = tv.at(c);
                }
                loss_node = mse(t, out, t.constant(std::move(target)));
            }
            float loss = t.value(loss_node).at(0);
            if (!std::isfinite(loss))
                throw std::runtime_error("train_head: non-finite loss at epoch " + std::to_string(epoch));
            t.backward(loss_node);

            std::vector<Tensor> grads;
            for (size_t k = 0; k < n_head; ++k) grads.push_back(t.grad(head_ids[k]));
            if (spec.finetune) {
                const Tensor& dh = t.grad(h_leaf);
                for (size_t k = n_head; k < params.size(); ++k) grads.emplace_back(params[k].shape);
#pragma omp parallel for schedule(dynamic)
                for (int s = 0; s < bsz; ++s) {
                    Tensor dseed({1, plan.feature_size});
                    for (int c = 0; c < plan.feature_size; ++c) dseed.at(0, c) = dh.at(s, c);
                    sample_tapes[s].backward_seeded(sample_h_nodes[s], dseed);
                }
                for (int s = 0; s < bsz; ++s)
                    for (size_t k = 0; k < sample_enc_ids[s].size(); ++k) {
                        const Tensor& g = sample_tapes[s].grad(sample_enc_ids[s][k]);
                        for (long i = 0; i < g.numel(); ++i) grads[n_head + k].at(i) += g.at(i);
                    }
            }

            adam_step(params, grads, adam_state, spec.adam);
            loss_sum += loss;
            ++batch_count;
        }
        result.epoch_loss.push_back(batch_count ? loss_sum / batch_count : 0.0);
    }

    for (size_t k = 0; k < n_head; ++k) result.head.params[k].value = params[k];
    if (spec.finetune)
        for (size_t k = 0; k < encoder.size(); ++k) encoder[k].value = params[n_head + k];
    return result;
}

double evaluate(const TaskSpec& spec, const std::vector<NamedTensor>& encoder, const EncoderPlan& plan,
                const HeadModel& head, const DownstreamData& test) {
    if (test.inputs.empty()) throw std::invalid_argument("evaluate: empty test set");
    Tensor h = encode_all(test.inputs, encoder, plan);
    TapeF t;
    int h_leaf = t.leaf(h, false);
    std::vector<int> head_ids = push_params(t, head.params);
    int out = head_forward(t, h_leaf, spec, head_ids);
    const Tensor& pred = t.value(out);
    int n = static_cast<int>(test.inputs.size());

    if (spec.kind == TaskKind::kClassification) {
        int correct = 0;
        int classes = pred.dim(1);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < classes; ++c)
                if (pred.at(i, c) > pred.at(i, best)) best = c;
            if (best == test.labels[i]) ++correct;
        }
        return 100.0 * correct / n;
    }

    double acc = 0;
    int cols = pred.dim(1);
    for (int i = 0; i < n; ++i) {
        Tensor row({cols});
        for (int c = 0; c < cols; ++c) row.at(c) = pred.at(i, c);
        acc += mae_mm(row, test.targets[i], spec.euclidean_mae);
    }
    return acc / n;
}

}  // namespace skelrep
