#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelrep/augment.hpp"
#include "skelrep/encoders.hpp"
#include "skelrep/optim.hpp"
#include "skelrep/tape.hpp"

namespace skelrep {

// NT-Xent over an interleaved batch: rows 2k and 2k+1 are the two views of
// sample k. Cosine similarity via row normalization, softmax over all other
// rows, temperature tau.
template <class T>
int nt_xent(Tape<T>& tape, int z, T temperature) {
    const auto& vz = tape.value(z);
    if (vz.ndim() != 2) throw std::invalid_argument("nt_xent: z must be 2-D, got " + TensorT<T>::shape_str(vz.shape));
    int rows = vz.dim(0);
    if (rows < 4 || rows % 2 != 0) throw std::invalid_argument("nt_xent: need at least 2 interleaved pairs");
    if (!(temperature > T(0))) throw std::invalid_argument("nt_xent: temperature must be positive");

    int zn = tape.l2_normalize_rows(z);
    int sim = tape.scale(tape.matmul(zn, tape.transpose(zn)), T(1) / temperature);
    // exclude self-similarity from the denominator
    TensorT<T> mask({rows, rows});
    for (int i = 0; i < rows; ++i) mask.at(i, i) = T(-1e9);
    int masked = tape.add(sim, tape.constant(std::move(mask)));
    int denom = tape.logsumexp_rows(masked);
    std::vector<int> pair(rows);
    for (int i = 0; i < rows; ++i) pair[i] = i ^ 1;
    int pos = tape.gather_cols(sim, pair);
    return tape.mean(tape.sub(denom, pos));
}

struct PretrainConfig {
    int batch_size = 256;
    int epochs = 20;
    float peak_lr = 0.01f;
    int warmup_epochs = 10;
    float temperature = 0.1f;
    uint64_t seed = 1;
    LarsConfig lars;  // lr field is driven by the schedule
};

struct PretrainResult {
    std::vector<NamedTensor> encoder;
    std::vector<NamedTensor> projection;
    std::vector<double> epoch_loss;
    std::vector<double> epoch_lr;
};

// SimCLR loop: per epoch, seeded shuffle, two views per window, encode,
// project, NT-Xent, LARS step with the warmup+cosine schedule. Deterministic
// for a fixed seed regardless of worker count.
PretrainResult pretrain(const PretrainConfig& cfg, const std::vector<View>& windows, const EncoderPlan& plan,
                        const AugmentationConfig& aug);

// Forward a single float window through encoder (no projection); returns the
// 128-d feature.
Tensor encode_window(const Tensor& window, const std::vector<NamedTensor>& encoder, const EncoderPlan& plan);

void write_loss_csv(const std::string& path, const PretrainResult& result);

}  // namespace skelrep
