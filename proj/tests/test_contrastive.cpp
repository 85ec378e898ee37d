#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "fd_check.hpp"
#include "skelrep/contrastive.hpp"

using namespace skelrep;

namespace {

// Brute-force NT-Xent written straight from the definition: normalize,
// cosine-similarity matrix by explicit dot products, per-row softmax
// cross-entropy against the paired view, O((2N)^2) with no shared code.
double brute_force_nt_xent(const std::vector<std::vector<double>>& z, double tau) {
    size_t rows = z.size();
    std::vector<std::vector<double>> zn(rows);
    for (size_t i = 0; i < rows; ++i) {
        double norm = 0;
        for (double x : z[i]) norm += x * x;
        norm = std::sqrt(norm);
        for (double x : z[i]) zn[i].push_back(x / norm);
    }
    double total = 0;
    for (size_t i = 0; i < rows; ++i) {
        size_t pos = i ^ 1;
        auto sim = [&](size_t a, size_t b) {
            double s = 0;
            for (size_t c = 0; c < zn[a].size(); ++c) s += zn[a][c] * zn[b][c];
            return s / tau;
        };
        double denom = 0;
        for (size_t j = 0; j < rows; ++j)
            if (j != i) denom += std::exp(sim(i, j));
        total += -std::log(std::exp(sim(i, pos)) / denom);
    }
    return total / rows;
}

double tape_nt_xent(const std::vector<std::vector<double>>& z, double tau) {
    int rows = static_cast<int>(z.size());
    int cols = static_cast<int>(z[0].size());
    TensorD t({rows, cols});
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c) t.at(i, c) = z[i][c];
    TapeD tape;
    int leaf = tape.leaf(t);
    return tape.value(nt_xent(tape, leaf, tau)).at(0);
}

std::vector<View> toy_windows(int n, uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<View> out;
    for (int i = 0; i < n; ++i) {
        View v({kWindowFrames, kNumJoints, 3});
        for (auto& x : v.data) x = rng.uniform(-0.5, 0.5);
        out.push_back(std::move(v));
    }
    return out;
}

bool params_equal(const std::vector<NamedTensor>& a, const std::vector<NamedTensor>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].value.shape != b[i].value.shape) return false;
        for (long j = 0; j < a[i].value.numel(); ++j)
            if (a[i].value.at(j) != b[i].value.at(j)) return false;
    }
    return true;
}

EncoderPlan tiny_plan() {
    EncoderPlan p = EncoderPlan::mlp();
    p.mlp_widths = {kWindowFrames * kNumJoints * 3, 16, 128};
    return p;
}

}  // namespace

TEST_CASE("nt_xent matches the brute-force oracle on 100 random batches") {
    auto t0 = std::chrono::steady_clock::now();
    RngStream rng(5, 0);
    for (int trial = 0; trial < 100; ++trial) {
        int n_pairs = 2 + static_cast<int>(rng.uniform_int(15));  // N in {2..16}
        int dim = 3 + static_cast<int>(rng.uniform_int(30));
        double tau = rng.uniform(0.05, 1.0);
        std::vector<std::vector<double>> z(2 * n_pairs, std::vector<double>(dim));
        for (auto& row : z)
            for (auto& x : row) x = rng.uniform(-2.0, 2.0);
        double ours = tape_nt_xent(z, tau);
        double ref = brute_force_nt_xent(z, tau);
        CHECK(std::fabs(ours - ref) <= 1e-6 * std::max(1.0, std::fabs(ref)));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 10.0);
}

TEST_CASE("an all-identical batch sits at the collapse value log(2N-1)") {
    for (int n_pairs : {2, 4, 8, 16}) {
        std::vector<std::vector<double>> z(2 * n_pairs, {0.3, -1.2, 0.8, 0.05});
        double loss = tape_nt_xent(z, 0.1);
        CHECK(std::fabs(loss - std::log(2.0 * n_pairs - 1.0)) <= 1e-6);
    }
    // spelled out for N=2: log 3
    std::vector<std::vector<double>> z4(4, {1.0, 2.0, 3.0});
    CHECK(tape_nt_xent(z4, 0.5) == doctest::Approx(1.0986123).epsilon(1e-6));
}

TEST_CASE("nt_xent is invariant to per-vector rescaling") {
    RngStream rng(6, 0);
    for (int trial = 0; trial < 10; ++trial) {
        int n_pairs = 3 + static_cast<int>(rng.uniform_int(6));
        std::vector<std::vector<double>> z(2 * n_pairs, std::vector<double>(16));
        for (auto& row : z)
            for (auto& x : row) x = rng.uniform(-1.0, 1.0);
        double base = tape_nt_xent(z, 0.1);
        auto scaled = z;
        for (auto& row : scaled) {
            double f = rng.uniform(0.1, 9.0);
            for (auto& x : row) x *= f;
        }
        CHECK(std::fabs(tape_nt_xent(scaled, 0.1) - base) <= 1e-6 * std::max(1.0, std::fabs(base)));
    }
}

TEST_CASE("nt_xent rejects malformed batches") {
    TapeD tape;
    int two_rows = tape.leaf(fd::TensorD({2, 8}, std::vector<double>(16, 0.5)));
    CHECK_THROWS(nt_xent(tape, two_rows, 0.1));
    int odd = tape.leaf(fd::TensorD({5, 8}, std::vector<double>(40, 0.5)));
    CHECK_THROWS(nt_xent(tape, odd, 0.1));
    int ok = tape.leaf(fd::TensorD({4, 8}, std::vector<double>(32, 0.5)));
    CHECK_THROWS(nt_xent(tape, ok, 0.0));
    CHECK_THROWS(nt_xent(tape, ok, -1.0));
}

TEST_CASE("nt_xent passes finite-difference checks") {
    for (int seed = 1; seed <= 10; ++seed) {
        RngStream rng(seed, RngStream::make_key(31, seed, 0));
        auto fn = [](fd::TapeD& t, const std::vector<int>& in) { return nt_xent(t, in[0], 0.1); };
        auto r = fd::check_gradients(fn, {fd::random_tensor({8, 12}, rng)});
        CHECK(r.max_rel_err < 1e-4);
    }
}

TEST_CASE("pretrain runs, is deterministic, and follows the lr schedule") {
    PretrainConfig cfg;
    cfg.epochs = 3;
    cfg.warmup_epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 5;
    EncoderPlan plan = tiny_plan();
    AugmentationConfig aug = AugmentationConfig::baseline();
    auto windows = toy_windows(16, 3);

    PretrainResult a = pretrain(cfg, windows, plan, aug);
    PretrainResult b = pretrain(cfg, windows, plan, aug);
    REQUIRE(a.epoch_loss.size() == 3);
    CHECK(a.epoch_loss == b.epoch_loss);
    CHECK(params_equal(a.encoder, b.encoder));
    CHECK(params_equal(a.projection, b.projection));
    for (size_t e = 0; e < a.epoch_lr.size(); ++e)
        CHECK(a.epoch_lr[e] == doctest::Approx(lr_schedule(static_cast<int>(e), 3, 2, cfg.peak_lr)));
    for (double l : a.epoch_loss) CHECK(std::isfinite(l));

    // a different seed moves the parameters
    cfg.seed = 6;
    PretrainResult c = pretrain(cfg, windows, plan, aug);
    CHECK(!params_equal(a.encoder, c.encoder));
}

TEST_CASE("pretrain with zero epochs returns the initialization") {
    PretrainConfig cfg;
    cfg.epochs = 0;
    cfg.warmup_epochs = 0;
    cfg.seed = 9;
    EncoderPlan plan = tiny_plan();
    auto windows = toy_windows(4, 1);
    PretrainResult r = pretrain(cfg, windows, plan, AugmentationConfig::baseline());
    CHECK(r.epoch_loss.empty());
    CHECK(params_equal(r.encoder, init_encoder_params(plan, 9)));
}

TEST_CASE("pretrain validates its configuration") {
    PretrainConfig cfg;
    cfg.epochs = 5;
    cfg.warmup_epochs = 5;
    EncoderPlan plan = tiny_plan();
    CHECK_THROWS(pretrain(cfg, toy_windows(4, 1), plan, AugmentationConfig::baseline()));
    cfg.warmup_epochs = 1;
    CHECK_THROWS(pretrain(cfg, {}, plan, AugmentationConfig::baseline()));
}

TEST_CASE("encode_window is stable across calls and batch sizes in pretrain") {
    // two pretrains that differ only in batch partitioning see the same data
    // through different chunk boundaries; encode_window on the results must
    // stay finite and 128-d
    auto windows = toy_windows(6, 8);
    PretrainConfig cfg;
    cfg.epochs = 1;
    cfg.warmup_epochs = 0;
    cfg.batch_size = 3;
    EncoderPlan plan = tiny_plan();
    PretrainResult r = pretrain(cfg, windows, plan, AugmentationConfig::baseline());
    Tensor f = encode_window(windows[0].cast<float>(), r.encoder, plan);
    REQUIRE(f.shape == std::vector<int>{128});
    for (long i = 0; i < f.numel(); ++i) CHECK(std::isfinite(f.at(i)));
}
