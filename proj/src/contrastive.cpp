#include "skelrep/contrastive.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace skelrep {

namespace {

// A chunk of views forwarded together on one tape; the tape stays alive until
// the loss tape hands back the gradient rows for its projections.
struct ChunkPass {
    TapeF tape;
    std::vector<int> enc_ids, proj_ids;
    int z_node = -1;
    int count = 0;
};

constexpr int kViewChunk = 64;

void forward_chunk(ChunkPass& pass, const std::vector<Tensor>& views, int base, int count,
                   const std::vector<NamedTensor>& enc, const std::vector<NamedTensor>& proj, const EncoderPlan& plan,
                   const Tensor& adjacency) {
    pass.count = count;
    pass.enc_ids = push_params(pass.tape, enc);
    pass.proj_ids = push_params(pass.tape, proj);
    int adj = pass.tape.constant(adjacency);
    Tensor stacked({count * kWindowFrames, kNumJoints, 3});
    long per_view = static_cast<long>(kWindowFrames) * kNumJoints * 3;
    for (int c = 0; c < count; ++c)
        std::copy(views[base + c].data.begin(), views[base + c].data.end(), stacked.data.begin() + c * per_view);
    int v = pass.tape.leaf(std::move(stacked), false);
    int h = encoder_forward_batched(pass.tape, v, count, plan, pass.enc_ids, adj);
    pass.z_node = projection_forward(pass.tape, h, pass.proj_ids);
}

}  // namespace

PretrainResult pretrain(const PretrainConfig& cfg, const std::vector<View>& windows, const EncoderPlan& plan,
                        const AugmentationConfig& aug) {
    if (windows.empty()) throw std::invalid_argument("pretrain: empty dataset");
    if (cfg.warmup_epochs >= cfg.epochs && cfg.epochs > 0)
        throw std::invalid_argument("pretrain: warmup must be shorter than total epochs");

    PretrainResult result;
    result.encoder = init_encoder_params(plan, cfg.seed);
    result.projection = init_projection_params(ProjectionPlan{}, cfg.seed);
    SkeletonGraph graph = build_adjacency();

    std::vector<Tensor> params;
    for (const auto& p : result.encoder) params.push_back(p.value);
    for (const auto& p : result.projection) params.push_back(p.value);
    size_t n_enc = result.encoder.size();
    LarsState lars_state;

    int n = static_cast<int>(windows.size());
    std::vector<int> order(n);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = lr_schedule(epoch, cfg.epochs, cfg.warmup_epochs, cfg.peak_lr);
        LarsConfig lars_cfg = cfg.lars;
        lars_cfg.lr = static_cast<float>(lr);

        for (int i = 0; i < n; ++i) order[i] = i;
        RngStream shuffle_rng(cfg.seed, RngStream::make_key(0x5071ULL + epoch, 0, 0));
        for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        double loss_sum = 0;
        int batch_count = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            int bsz = std::min(cfg.batch_size, n - start);
            if (bsz < 2) continue;  // NT-Xent needs at least two pairs
            int rows = 2 * bsz;

            // views for this batch (augmentation is cheap; no kernels inside)
            std::vector<Tensor> views(rows);
            for (int s = 0; s < bsz; ++s) {
                int wi = order[start + s];
                auto [va, vb] = make_views(windows[wi], aug, cfg.seed, epoch, wi);
                views[2 * s] = va.cast<float>();
                views[2 * s + 1] = vb.cast<float>();
            }

            // forward in chunks, tapes kept alive for the backward pass
            std::vector<ChunkPass> passes((rows + kViewChunk - 1) / kViewChunk);
            Tensor z({rows, plan.feature_size});
            for (size_t ci = 0; ci < passes.size(); ++ci) {
                int base = static_cast<int>(ci) * kViewChunk;
                int cnt = std::min(kViewChunk, rows - base);
                forward_chunk(passes[ci], views, base, cnt, result.encoder, result.projection, plan, graph.adjacency);
                const Tensor& zv = passes[ci].tape.value(passes[ci].z_node);
                std::copy(zv.data.begin(), zv.data.end(), z.data.begin() + static_cast<long>(base) * plan.feature_size);
            }

            // loss tape over the stacked projections
            TapeF loss_tape;
            int z_leaf = loss_tape.leaf(z);
            int loss_node = nt_xent(loss_tape, z_leaf, cfg.temperature);
            float loss = loss_tape.value(loss_node).at(0);
            if (!std::isfinite(loss))
                throw std::runtime_error("pretrain: non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                                         std::to_string(batch_count));
            loss_tape.backward(loss_node);
            const Tensor& dz = loss_tape.grad(z_leaf);

            // backward each chunk seeded with its projection-grad rows, then
            // sum parameter grads in fixed chunk order
            std::vector<Tensor> grads;
            for (const auto& p : params) grads.emplace_back(p.shape);
            for (size_t ci = 0; ci < passes.size(); ++ci) {
                ChunkPass& pass = passes[ci];
                int base = static_cast<int>(ci) * kViewChunk;
                Tensor seed({pass.count, plan.feature_size});
                std::copy(dz.data.begin() + static_cast<long>(base) * plan.feature_size,
                          dz.data.begin() + static_cast<long>(base + pass.count) * plan.feature_size,
                          seed.data.begin());
                pass.tape.backward_seeded(pass.z_node, seed);
                for (size_t k = 0; k < n_enc; ++k) {
                    const Tensor& g = pass.tape.grad(pass.enc_ids[k]);
                    for (long i = 0; i < g.numel(); ++i) grads[k].at(i) += g.at(i);
                }
                for (size_t k = 0; k < pass.proj_ids.size(); ++k) {
                    const Tensor& g = pass.tape.grad(pass.proj_ids[k]);
                    for (long i = 0; i < g.numel(); ++i) grads[n_enc + k].at(i) += g.at(i);
                }
                pass = ChunkPass{};  // release the tape before the next chunk's grads
            }

            lars_momentum_step(params, grads, lars_state, lars_cfg);
            for (size_t k = 0; k < n_enc; ++k) result.encoder[k].value = params[k];
            for (size_t k = n_enc; k < params.size(); ++k) result.projection[k - n_enc].value = params[k];

            loss_sum += loss;
            ++batch_count;
        }
        result.epoch_loss.push_back(batch_count ? loss_sum / batch_count : 0.0);
        result.epoch_lr.push_back(lr);
    }
    return result;
}

Tensor encode_window(const Tensor& window, const std::vector<NamedTensor>& encoder, const EncoderPlan& plan) {
    static const SkeletonGraph graph = build_adjacency();
    TapeF tape;
    auto ids = push_params(tape, encoder);
    int adj = tape.constant(graph.adjacency);
    int v = tape.leaf(window, false);
    int h = encoder_forward(tape, v, plan, ids, adj);
    const Tensor& hv = tape.value(h);
    return Tensor({plan.feature_size}, hv.data);
}

void write_loss_csv(const std::string& path, const PretrainResult& result) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write loss curve: " + path);
    os << "epoch,mean_loss,lr\n";
    for (size_t e = 0; e < result.epoch_loss.size(); ++e)
        os << e << "," << result.epoch_loss[e] << "," << result.epoch_lr[e] << "\n";
}

}  // namespace skelrep
