#include "skelrep/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "skelrep/preprocess.hpp"

namespace skelrep {

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    ExperimentConfig c;
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();
    if (c.seeds.empty()) throw std::runtime_error("config: need at least one seed");
    c.profile = j.value("profile", c.profile);
    c.encoder = j.value("encoder", c.encoder);
    c.pretrain.batch_size = j.value("batch_size", c.pretrain.batch_size);
    c.pretrain.epochs = j.value("epochs", c.pretrain.epochs);
    c.pretrain.peak_lr = j.value("learning_rate", c.pretrain.peak_lr);
    c.pretrain.warmup_epochs = j.value("warmup_epochs", c.pretrain.warmup_epochs);
    c.pretrain.temperature = j.value("temperature", c.pretrain.temperature);
    c.synth.num_classes = j.value("synth_classes", c.synth.num_classes);
    c.synth.sequences_per_class = j.value("synth_sequences_per_class", c.synth.sequences_per_class);
    c.synth.frames_per_sequence = j.value("synth_frames", c.synth.frames_per_sequence);
    c.synth.fps = j.value("synth_fps", c.synth.fps);
    c.synth.noise_level = j.value("synth_noise", c.synth.noise_level);
    c.window_stride = j.value("window_stride", c.window_stride);
    c.probe_epochs = j.value("probe_epochs", c.probe_epochs);
    c.probe_batch = j.value("probe_batch", c.probe_batch);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.subsample_sequences = j.value("subsample_sequences", c.subsample_sequences);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

void ExperimentConfig::save(const std::string& path) const {
    nlohmann::json j;
    j["seeds"] = seeds;
    j["profile"] = profile;
    j["encoder"] = encoder;
    j["batch_size"] = pretrain.batch_size;
    j["epochs"] = pretrain.epochs;
    j["learning_rate"] = pretrain.peak_lr;
    j["warmup_epochs"] = pretrain.warmup_epochs;
    j["temperature"] = pretrain.temperature;
    j["synth_classes"] = synth.num_classes;
    j["synth_sequences_per_class"] = synth.sequences_per_class;
    j["synth_frames"] = synth.frames_per_sequence;
    j["synth_fps"] = synth.fps;
    j["synth_noise"] = synth.noise_level;
    j["window_stride"] = window_stride;
    j["probe_epochs"] = probe_epochs;
    j["probe_batch"] = probe_batch;
    j["train_fraction"] = train_fraction;
    j["subsample_sequences"] = subsample_sequences;
    j["out_dir"] = out_dir;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write config: " + path);
    os << j.dump(2) << "\n";
}

Corpus corpus_from_sequences(std::vector<SkeletonSequence> normalized, int stride) {
    Corpus corpus;
    // deterministic sequence-level split: every 5th sequence held out
    for (size_t i = 0; i < normalized.size(); ++i) {
        if (i % 5 == 4)
            corpus.test_seqs.push_back(std::move(normalized[i]));
        else
            corpus.train_seqs.push_back(std::move(normalized[i]));
    }
    for (const auto& seq : corpus.train_seqs)
        for (const auto& w : window(seq, kWindowFrames, stride)) {
            Tensor t = to_tensor(w);
            corpus.train_windows.push_back(t);
            corpus.train_labels.push_back(w.label);
            corpus.pretrain_windows.push_back(t.cast<double>());
        }
    for (const auto& seq : corpus.test_seqs)
        for (const auto& w : window(seq, kWindowFrames, stride)) {
            corpus.test_windows.push_back(to_tensor(w));
            corpus.test_labels.push_back(w.label);
        }
    return corpus;
}

Corpus build_corpus(const SyntheticSpec& spec, uint64_t seed, int stride) {
    auto raw = synth_generate(spec, seed);
    std::vector<SkeletonSequence> normalized;
    normalized.reserve(raw.size());
    for (auto& s : raw) normalized.push_back(normalize_sequence(s).first);
    return corpus_from_sequences(std::move(normalized), stride);
}

void save_encoder_checkpoint(const std::string& path, const EncoderPlan& plan,
                             const std::vector<NamedTensor>& encoder, const std::vector<NamedTensor>& projection) {
    Checkpoint ckpt;
    ckpt.meta = plan.to_json();
    for (const auto& p : encoder) ckpt.tensors.push_back({"encoder." + p.name, p.value});
    for (const auto& p : projection) ckpt.tensors.push_back({"projection." + p.name, p.value});
    ckpt.save(path);
}

LoadedEncoder load_encoder_checkpoint(const std::string& path) {
    Checkpoint ckpt = Checkpoint::load(path);
    LoadedEncoder out;
    out.plan = EncoderPlan::from_json(ckpt.meta);
    for (const auto& t : ckpt.tensors) {
        if (t.name.rfind("encoder.", 0) == 0)
            out.encoder.push_back({t.name.substr(8), t.value});
        else if (t.name.rfind("projection.", 0) == 0)
            out.projection.push_back({t.name.substr(11), t.value});
    }
    return out;
}

LoadedEncoder load_encoder_checkpoint_for(const std::string& path, const EncoderPlan& expected) {
    LoadedEncoder out = load_encoder_checkpoint(path);
    if (!(out.plan == expected))
        throw std::runtime_error("checkpoint architecture plan does not match the requested encoder");
    return out;
}

std::vector<int> subsample_indices(int count, double fraction, uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("train fraction must lie in [0,1]");
    std::vector<int> idx(count);
    for (int i = 0; i < count; ++i) idx[i] = i;
    if (fraction >= 1.0) return idx;
    RngStream rng(seed, RngStream::make_key(0xf4acULL, 0, 0));
    for (int i = count - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
    int keep = std::max(1, static_cast<int>(std::lround(fraction * count)));
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

DownstreamData build_task_data(const TaskSpec& spec, const Corpus& corpus, bool train, uint64_t seed) {
    const auto& windows = train ? corpus.train_windows : corpus.test_windows;
    const auto& labels = train ? corpus.train_labels : corpus.test_labels;
    const auto& seqs = train ? corpus.train_seqs : corpus.test_seqs;
    switch (spec.kind) {
        case TaskKind::kReconstruction: return make_reconstruction_data(windows, spec.corruption_rate, seed);
        case TaskKind::kMotionPrediction: return make_motion_prediction_data(seqs, kWindowFrames);
        case TaskKind::kClassification: return make_classification_data(windows, labels);
    }
    throw std::logic_error("unreachable");
}

DownstreamData subset(const DownstreamData& d, const std::vector<int>& idx) {
    DownstreamData out;
    for (int i : idx) {
        out.inputs.push_back(d.inputs[i]);
        if (!d.targets.empty()) out.targets.push_back(d.targets[i]);
        if (!d.labels.empty()) out.labels.push_back(d.labels[i]);
    }
    return out;
}

}  // namespace

ProbeOutcome run_probe(const TaskSpec& spec, const LoadedEncoder& model, const Corpus& corpus,
                       const std::vector<uint64_t>& seeds, const std::string& profile, double train_fraction) {
    if (seeds.empty()) throw std::invalid_argument("run_probe: need at least one seed");
    ProbeOutcome out;
    std::vector<double> metrics;
    for (uint64_t seed : seeds) {
        DownstreamData train = build_task_data(spec, corpus, true, seed);
        DownstreamData test = build_task_data(spec, corpus, false, seed ^ 0x7e57ULL);
        if (train_fraction < 1.0)
            train = subset(train, subsample_indices(static_cast<int>(train.inputs.size()), train_fraction, seed));

        std::vector<NamedTensor> encoder = model.encoder;  // copy; finetune may update
        auto trained = train_head(spec, encoder, model.plan, train, seed);
        double metric = evaluate(spec, encoder, model.plan, trained.head, test);

        TaskReport r;
        r.task = task_kind_name(spec.kind);
        r.mode = spec.finetune ? "finetune" : "frozen";
        r.metric = metric;
        r.profile = profile;
        r.seed = seed;
        r.epochs = spec.epochs;
        r.head_params = total_params(trained.head.params);
        r.trained_params = r.head_params + (spec.finetune ? total_params(encoder) : 0);
        out.per_seed.push_back(r);
        metrics.push_back(metric);
    }
    double mean = 0;
    for (double m : metrics) mean += m;
    mean /= metrics.size();
    double var = 0;
    for (double m : metrics) var += (m - mean) * (m - mean);
    double sd = metrics.size() > 1 ? std::sqrt(var / (metrics.size() - 1)) : 0.0;

    out.aggregate = out.per_seed.front();
    out.aggregate.metric = mean;
    out.aggregate.std_dev = sd;
    out.aggregate.seed = 0;
    return out;
}

void append_ledger(const std::string& path, const TaskReport& report) {
    bool fresh = !std::ifstream(path).good();
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("cannot append ledger: " + path);
    if (fresh) os << "profile,task,mode,seed,metric\n";
    os << report.profile << "," << report.task << "," << report.mode << "," << report.seed << "," << report.metric
       << "\n";
}

namespace {

struct RowPlan {
    std::string aug_profile = "baseline";
    std::string encoder = "stgcn";
    bool finetune = false;
    double fraction = 1.0;
};

RowPlan plan_for_row(const std::string& name, const ExperimentConfig& cfg) {
    RowPlan p;
    p.encoder = cfg.encoder;
    if (name == "finetuning") {
        p.finetune = true;
    } else if (name == "mlp-backbone") {
        p.encoder = "mlp";
    } else if (name.rfind("frac-", 0) == 0) {
        p.fraction = std::stod(name.substr(5)) / 100.0;
    } else {
        p.aug_profile = name;  // validates below via AugmentationConfig::profile
        AugmentationConfig::profile(name);
    }
    return p;
}

}  // namespace

AblationResult run_ablation(const ExperimentConfig& cfg, const std::vector<std::string>& profiles,
                            const TaskSpec& base_task, const std::string& ledger_path) {
    // resolve every row before any run starts
    std::vector<RowPlan> plans;
    for (const auto& name : profiles) plans.push_back(plan_for_row(name, cfg));

    Corpus corpus = build_corpus(cfg.synth, cfg.seeds.front(), cfg.window_stride);

    // per-seed pretrained encoders, cached across rows that share them
    std::map<std::string, LoadedEncoder> cache;
    auto pretrained = [&](const RowPlan& p, uint64_t seed) -> const LoadedEncoder& {
        std::string key = p.aug_profile + "|" + p.encoder + "|" + std::to_string(seed);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        EncoderPlan plan = p.encoder == "mlp" ? EncoderPlan::mlp() : EncoderPlan::stgcn();
        PretrainConfig pc = cfg.pretrain;
        pc.seed = seed;
        auto result = pretrain(pc, corpus.pretrain_windows, plan, AugmentationConfig::profile(p.aug_profile));
        LoadedEncoder le;
        le.plan = plan;
        le.encoder = std::move(result.encoder);
        le.projection = std::move(result.projection);
        return cache.emplace(key, std::move(le)).first->second;
    };

    // run rows, appending raw per-seed rows to the ledger
    std::map<std::string, std::vector<double>> per_row_metrics;
    for (size_t r = 0; r < profiles.size(); ++r) {
        const RowPlan& p = plans[r];
        TaskSpec task = base_task;
        task.finetune = p.finetune;
        task.epochs = cfg.probe_epochs;
        task.batch = cfg.probe_batch;
        for (uint64_t seed : cfg.seeds) {
            const LoadedEncoder& model = pretrained(p, seed);
            ProbeOutcome probe = run_probe(task, model, corpus, {seed}, profiles[r], p.fraction * cfg.train_fraction);
            append_ledger(ledger_path, probe.per_seed.front());
        }
    }

    // deltas recomputed from the raw ledger, not from cached aggregates
    {
        std::ifstream is(ledger_path);
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            std::istringstream ls(line);
            std::string profile, task, mode, seed, metric;
            std::getline(ls, profile, ',');
            std::getline(ls, task, ',');
            std::getline(ls, mode, ',');
            std::getline(ls, seed, ',');
            std::getline(ls, metric, ',');
            if (task == task_kind_name(base_task.kind)) per_row_metrics[profile].push_back(std::stod(metric));
        }
    }

    AblationResult result;
    auto stats = [&](const std::string& name) {
        const auto& v = per_row_metrics[name];
        double mean = 0;
        for (double m : v) mean += m;
        mean = v.empty() ? 0 : mean / v.size();
        double var = 0;
        for (double m : v) var += (m - mean) * (m - mean);
        double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
        return std::make_pair(mean, sd);
    };
    auto [base_mean, base_sd] = stats(profiles.front() == "baseline" ? "baseline" : profiles.front());

    std::ostringstream csv, table;
    csv << "profile,metric,std,delta\n";
    table << "profile                        metric      std     delta\n";
    for (const auto& name : profiles) {
        auto [mean, sd] = stats(name);
        AblationRow row{name, mean, sd, mean - base_mean};
        result.rows.push_back(row);
        csv << name << "," << mean << "," << sd << "," << row.delta << "\n";
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-28s %9.3f %8.3f %9.3f\n", name.c_str(), mean, sd, row.delta);
        table << buf;
    }
    result.csv = csv.str();
    result.table = table.str();
    return result;
}

}  // namespace skelrep
