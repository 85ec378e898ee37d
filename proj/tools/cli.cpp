// skelrep command-line surface: synthetic corpus generation, preprocessing,
// contrastive pretraining, downstream probes, and the ablation runner.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
// SKELREP_OUT sets the default output root (flag --out overrides).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skelrep/experiment.hpp"
#include "skelrep/io.hpp"
#include "skelrep/preprocess.hpp"

namespace fs = std::filesystem;
using namespace skelrep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for bad arguments/config discovered after flag parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_out_root() {
    const char* env = std::getenv("SKELREP_OUT");
    return env && *env ? env : "out";
}

struct CommonOpts {
    std::string config_path;
    std::vector<uint64_t> seeds;
    std::string profile;
    int epochs = -1;
    int batch = -1;
    double temperature = -1.0;
    std::string out_dir;
    std::string format = "text";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Experiment config JSON");
    cmd->add_option("--seed", o.seeds, "Seed list (overrides config)");
    cmd->add_option("--profile", o.profile, "Augmentation profile (overrides config)");
    cmd->add_option("--epochs", o.epochs, "Pretrain/probe epochs (overrides config)");
    cmd->add_option("--batch", o.batch, "Batch size (overrides config)");
    cmd->add_option("--temperature", o.temperature, "NT-Xent temperature (overrides config)");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json", "text"}));
}

ExperimentConfig resolve_config(const CommonOpts& o, bool epochs_are_probe = false) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        try {
            cfg = ExperimentConfig::load(o.config_path);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (!o.profile.empty()) cfg.profile = o.profile;
    if (o.epochs >= 0) (epochs_are_probe ? cfg.probe_epochs : cfg.pretrain.epochs) = o.epochs;
    if (o.batch > 0) (epochs_are_probe ? cfg.probe_batch : cfg.pretrain.batch_size) = o.batch;
    if (o.temperature > 0) cfg.pretrain.temperature = static_cast<float>(o.temperature);
    if (!o.out_dir.empty())
        cfg.out_dir = o.out_dir;
    else if (cfg.out_dir == "out")
        cfg.out_dir = default_out_root();
    return cfg;
}

AugmentationConfig profile_or_usage_error(const std::string& name) {
    try {
        return AugmentationConfig::profile(name);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

EncoderPlan plan_for(const std::string& encoder) {
    if (encoder == "stgcn") return EncoderPlan::stgcn();
    if (encoder == "mlp") return EncoderPlan::mlp();
    throw UsageError("unknown encoder: " + encoder);
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve_config(opts);
    cfg.synth.validate();
    uint64_t seed = cfg.seeds.front();
    auto sequences = synth_generate(cfg.synth, seed);

    fs::create_directories(cfg.out_dir);
    for (size_t i = 0; i < sequences.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%05zu.jsonl", i);
        std::ofstream os(fs::path(cfg.out_dir) / name, std::ios::binary);
        if (!os) throw std::runtime_error(std::string("cannot write ") + name);
        os << to_jsonl_line(sequences[i]) << "\n";
    }
    std::cout << "wrote " << sequences.size() << " sequences to " << cfg.out_dir << "\n";
    return kExitOk;
}

// ----------------------------------------------------------- preprocess ----

std::vector<SkeletonSequence> read_input_file(const fs::path& p) {
    std::string ext = p.extension().string();
    if (ext == ".skseq") return {load_skseq(p.string())};
    if (ext == ".jsonl" || ext == ".json") return load_jsonl(p.string());
    throw std::runtime_error("unsupported input format: " + p.string());
}

int cmd_preprocess(const std::string& input_dir, const std::string& mapping_path, const CommonOpts& opts) {
    if (!fs::is_directory(input_dir)) throw UsageError("input is not a directory: " + input_dir);
    JointMapping mapping = mapping_path.empty() ? JointMapping::identity() : JointMapping::load(mapping_path);
    mapping.check_complete();
    (void)mapping;  // canonical inputs carry joints in order; mapping applies at raw ingestion

    std::string out_dir = !opts.out_dir.empty() ? opts.out_dir : default_out_root();
    fs::create_directories(out_dir);

    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.is_regular_file()) {
            std::string ext = e.path().extension().string();
            if (ext == ".skseq" || ext == ".jsonl" || ext == ".json") inputs.push_back(e.path());
        }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw UsageError("no .jsonl/.json/.skseq inputs in " + input_dir);

    int failures = 0;
    for (const auto& p : inputs) {
        try {
            auto sequences = read_input_file(p);
            for (size_t i = 0; i < sequences.size(); ++i) {
                auto [normalized, report] = normalize_sequence(sequences[i]);
                fs::path out = fs::path(out_dir) / p.stem();
                if (sequences.size() > 1) out += "_" + std::to_string(i);
                out += ".skseq";
                save_skseq(out.string(), normalized);
                std::cout << out.filename().string() << ": frames=" << normalized.num_frames()
                          << " scale=" << report.scale_factor << "\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "FAILED " << p.filename().string() << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures) {
        std::cerr << failures << " of " << inputs.size() << " inputs failed\n";
        return kExitRuntime;
    }
    return kExitOk;
}

// ------------------------------------------------------------- pretrain ----

int cmd_pretrain(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve_config(opts);
    AugmentationConfig aug = profile_or_usage_error(cfg.profile);
    EncoderPlan plan = plan_for(cfg.encoder);

    Corpus corpus = build_corpus(cfg.synth, cfg.seeds.front(), cfg.window_stride);
    fs::create_directories(cfg.out_dir);

    for (uint64_t seed : cfg.seeds) {
        PretrainConfig pc = cfg.pretrain;
        pc.seed = seed;
        if (pc.warmup_epochs >= pc.epochs && pc.epochs > 0) pc.warmup_epochs = pc.epochs - 1;
        PretrainResult result = pretrain(pc, corpus.pretrain_windows, plan, aug);

        fs::path ckpt = fs::path(cfg.out_dir) / ("encoder_seed" + std::to_string(seed) + ".skckpt");
        fs::path loss = fs::path(cfg.out_dir) / ("loss_seed" + std::to_string(seed) + ".csv");
        save_encoder_checkpoint(ckpt.string(), plan, result.encoder, result.projection);
        write_loss_csv(loss.string(), result);
        std::cout << "seed " << seed << ": checkpoint " << ckpt.string();
        if (!result.epoch_loss.empty()) std::cout << " final_loss " << result.epoch_loss.back();
        std::cout << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- probe ----

void print_probe(const ProbeOutcome& out, const std::string& format) {
    if (format == "json") {
        std::cout << "{\"aggregate\":" << out.aggregate.to_json() << ",\"per_seed\":[";
        for (size_t i = 0; i < out.per_seed.size(); ++i)
            std::cout << (i ? "," : "") << out.per_seed[i].to_json();
        std::cout << "]}\n";
    } else if (format == "csv") {
        std::cout << "profile,task,mode,seed,metric,std\n";
        for (const auto& r : out.per_seed)
            std::cout << r.profile << "," << r.task << "," << r.mode << "," << r.seed << "," << r.metric << ",\n";
        const auto& a = out.aggregate;
        std::cout << a.profile << "," << a.task << "," << a.mode << ",mean," << a.metric << "," << a.std_dev << "\n";
    } else {
        const auto& a = out.aggregate;
        std::cout << a.task << " (" << a.mode << ", " << out.per_seed.size() << " seeds): " << a.metric << " +/- "
                  << a.std_dev << "\n";
        std::cout << "head params: " << a.head_params << ", trained params: " << a.trained_params << "\n";
    }
}

int cmd_probe(const std::string& checkpoint, const std::string& task_name, bool finetune, const CommonOpts& opts) {
    ExperimentConfig cfg = resolve_config(opts, /*epochs_are_probe=*/true);
    if (!fs::is_regular_file(checkpoint)) throw UsageError("checkpoint not found: " + checkpoint);
    TaskKind kind;
    try {
        kind = task_kind_from_name(task_name);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    LoadedEncoder model = load_encoder_checkpoint(checkpoint);
    Corpus corpus = build_corpus(cfg.synth, cfg.seeds.front(), cfg.window_stride);

    TaskSpec spec;
    spec.kind = kind;
    spec.finetune = finetune;
    spec.epochs = cfg.probe_epochs;
    spec.batch = cfg.probe_batch;
    if (kind == TaskKind::kClassification) spec.num_classes = cfg.synth.num_classes;

    ProbeOutcome out = run_probe(spec, model, corpus, cfg.seeds, cfg.profile, cfg.train_fraction);
    print_probe(out, opts.format);
    return kExitOk;
}

// --------------------------------------------------------------- ablate ----

int cmd_ablate(const std::vector<std::string>& profiles, const std::string& task_name, const CommonOpts& opts) {
    ExperimentConfig cfg = resolve_config(opts);
    TaskKind kind;
    try {
        kind = task_kind_from_name(task_name);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    // resolve every augmentation row up front so a bad name aborts cleanly
    for (const auto& name : profiles)
        if (name != "finetuning" && name != "mlp-backbone" && name.rfind("frac-", 0) != 0)
            profile_or_usage_error(name);

    TaskSpec task;
    task.kind = kind;
    if (kind == TaskKind::kClassification) task.num_classes = cfg.synth.num_classes;

    fs::create_directories(cfg.out_dir);
    fs::path ledger = fs::path(cfg.out_dir) / "ablation_ledger.csv";
    AblationResult result = run_ablation(cfg, profiles, task, ledger.string());

    if (opts.format == "csv") {
        std::cout << result.csv;
    } else if (opts.format == "json") {
        std::cout << "[";
        for (size_t i = 0; i < result.rows.size(); ++i) {
            const auto& r = result.rows[i];
            std::cout << (i ? "," : "") << "{\"profile\":\"" << r.profile << "\",\"metric\":" << r.metric
                      << ",\"std\":" << r.std_dev << ",\"delta\":" << r.delta << "}";
        }
        std::cout << "]\n";
    } else {
        std::cout << result.table;
    }
    std::ofstream(fs::path(cfg.out_dir) / "ablation.csv") << result.csv;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contrastive skeleton representation toolkit"};
    app.require_subcommand(1);

    CommonOpts synth_opts, pre_opts, pretrain_opts, probe_opts, ablate_opts;
    std::string input_dir, mapping_path, checkpoint, task_name = "classification";
    bool finetune = false;
    std::vector<std::string> profiles = {"baseline"};

    CLI::App* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    add_common(synth, synth_opts);

    CLI::App* pre = app.add_subcommand("preprocess", "Normalize raw sequences to .skseq");
    pre->add_option("input", input_dir, "Directory of .jsonl/.json/.skseq inputs")->required();
    pre->add_option("--mapping", mapping_path, "Joint-name mapping JSON");
    add_common(pre, pre_opts);

    CLI::App* pt = app.add_subcommand("pretrain", "Contrastive pretraining");
    add_common(pt, pretrain_opts);

    CLI::App* pb = app.add_subcommand("probe", "Train and evaluate a downstream head");
    pb->add_option("--checkpoint", checkpoint, "Encoder checkpoint")->required();
    pb->add_option("--task", task_name, "classification|reconstruction|motion-prediction");
    pb->add_flag("--finetune", finetune, "Update the encoder during head training");
    add_common(pb, probe_opts);

    CLI::App* ab = app.add_subcommand("ablate", "Run the ablation grid");
    ab->add_option("--profiles", profiles, "Ablation rows");
    ab->add_option("--task", task_name, "classification|reconstruction|motion-prediction");
    add_common(ab, ablate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_opts);
        if (pre->parsed()) return cmd_preprocess(input_dir, mapping_path, pre_opts);
        if (pt->parsed()) return cmd_pretrain(pretrain_opts);
        if (pb->parsed()) return cmd_probe(checkpoint, task_name, finetune, probe_opts);
        if (ab->parsed()) return cmd_ablate(profiles, task_name, ablate_opts);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
