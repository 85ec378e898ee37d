#pragma once

#include <string>
#include <vector>

#include "skelrep/augment.hpp"
#include "skelrep/contrastive.hpp"
#include "skelrep/downstream.hpp"
#include "skelrep/synth.hpp"

namespace skelrep {

struct ExperimentConfig {
    std::vector<uint64_t> seeds = {1, 2, 3};
    std::string profile = "baseline";
    std::string encoder = "stgcn";
    PretrainConfig pretrain;
    SyntheticSpec synth;
    int window_stride = 25;
    int probe_epochs = 50;
    int probe_batch = 128;
    double train_fraction = 1.0;     // downstream training-set subsampling
    bool subsample_sequences = false;  // subsample whole sequences instead of windows
    std::string out_dir = "out";

    static ExperimentConfig load(const std::string& path);
    void save(const std::string& path) const;
};

// Normalized desk corpus with an 80/20 sequence-level split (every 5th
// sequence of each class held out).
struct Corpus {
    std::vector<SkeletonSequence> train_seqs, test_seqs;
    std::vector<View> pretrain_windows;                 // train windows, double
    std::vector<Tensor> train_windows, test_windows;    // float {50,15,3}
    std::vector<int> train_labels, test_labels;
};

Corpus build_corpus(const SyntheticSpec& spec, uint64_t seed, int stride);
Corpus corpus_from_sequences(std::vector<SkeletonSequence> normalized, int stride);

// Checkpoint wrappers carrying the architecture plan so evaluation can refuse
// mismatched weights.
void save_encoder_checkpoint(const std::string& path, const EncoderPlan& plan,
                             const std::vector<NamedTensor>& encoder, const std::vector<NamedTensor>& projection);
struct LoadedEncoder {
    EncoderPlan plan;
    std::vector<NamedTensor> encoder, projection;
};
LoadedEncoder load_encoder_checkpoint(const std::string& path);
LoadedEncoder load_encoder_checkpoint_for(const std::string& path, const EncoderPlan& expected);

// Seeded subsample of downstream training windows (fraction of windows, or of
// source sequences when by_sequence is set).
std::vector<int> subsample_indices(int count, double fraction, uint64_t seed);

struct ProbeOutcome {
    TaskReport aggregate;               // metric = mean over seeds, std filled
    std::vector<TaskReport> per_seed;
};

ProbeOutcome run_probe(const TaskSpec& spec, const LoadedEncoder& model, const Corpus& corpus,
                       const std::vector<uint64_t>& seeds, const std::string& profile, double train_fraction = 1.0);

// One row per run appended under a single writer.
void append_ledger(const std::string& path, const TaskReport& report);

struct AblationRow {
    std::string profile;
    double metric = 0, std_dev = 0, delta = 0;
};

struct AblationResult {
    std::vector<AblationRow> rows;
    std::string csv;
    std::string table;  // aligned text, baseline delta column
};

// Pretrains per profile/seed, probes, and recomputes deltas from the raw
// per-seed ledger.
AblationResult run_ablation(const ExperimentConfig& cfg, const std::vector<std::string>& profiles,
                            const TaskSpec& task, const std::string& ledger_path);

}  // namespace skelrep
