#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "skelrep/contrastive.hpp"
#include "skelrep/encoders.hpp"
#include "skelrep/skeleton.hpp"

using namespace skelrep;

namespace {

Tensor random_window(RngStream& rng) {
    Tensor w({kWindowFrames, kNumJoints, 3});
    for (auto& x : w.data) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return w;
}

// small ST-GCN plan so finite differences stay affordable
EncoderPlan tiny_stgcn() {
    EncoderPlan p;
    p.channels = {3, 4, 5};
    p.strides = {1, 2};
    p.temporal_kernel = 3;
    p.feature_size = 6;
    return p;
}

EncoderPlan tiny_mlp() {
    EncoderPlan p = EncoderPlan::mlp();
    p.mlp_widths = {kWindowFrames * kNumJoints * 3, 8, 6};
    p.feature_size = 6;
    return p;
}

}  // namespace

TEST_CASE("plan JSON round-trips and names resolve") {
    for (EncoderPlan plan : {EncoderPlan::stgcn(), EncoderPlan::mlp()}) {
        EncoderPlan back = EncoderPlan::from_json(plan.to_json());
        CHECK(back == plan);
    }
    CHECK(encoder_kind_from_name("stgcn") == EncoderKind::kStgcn);
    CHECK(encoder_kind_from_name("mlp") == EncoderKind::kMlp);
    CHECK_THROWS(encoder_kind_from_name("transformer"));
}

TEST_CASE("default plans match the published architecture") {
    EncoderPlan st = EncoderPlan::stgcn();
    CHECK(st.channels == std::vector<int>{3, 32, 64, 128});
    CHECK(st.strides == std::vector<int>{1, 2, 2});
    CHECK(st.temporal_kernel == 9);
    CHECK(st.feature_size == 128);
    EncoderPlan mlp = EncoderPlan::mlp();
    CHECK(mlp.mlp_widths.front() == kWindowFrames * kNumJoints * 3);
    CHECK(mlp.mlp_widths.back() == 128);
}

TEST_CASE("initialization is seeded and parameter counts are exact") {
    auto enc1 = init_encoder_params(EncoderPlan::stgcn(), 7);
    auto enc2 = init_encoder_params(EncoderPlan::stgcn(), 7);
    auto enc3 = init_encoder_params(EncoderPlan::stgcn(), 8);
    REQUIRE(enc1.size() == enc2.size());
    bool all_equal = true, any_diff = false;
    for (size_t i = 0; i < enc1.size(); ++i) {
        for (long j = 0; j < enc1[i].value.numel(); ++j) {
            if (enc1[i].value.at(j) != enc2[i].value.at(j)) all_equal = false;
            if (enc1[i].value.at(j) != enc3[i].value.at(j)) any_diff = true;
        }
    }
    CHECK(all_equal);
    CHECK(any_diff);

    // spatial w+b per block, temporal w+b per block, head w+b
    long expect = 0;
    std::vector<int> ch = {3, 32, 64, 128};
    for (size_t b = 0; b + 1 < ch.size(); ++b)
        expect += ch[b] * ch[b + 1] + ch[b + 1] + 9 * ch[b + 1] * ch[b + 1] + ch[b + 1];
    expect += 128 * 128 + 128;
    CHECK(total_params(enc1) == expect);

    // projection 128 -> 256 -> 256 -> 128
    auto proj = init_projection_params(ProjectionPlan{}, 7);
    CHECK(total_params(proj) == (128 * 256 + 256) + (256 * 256 + 256) + (256 * 128 + 128));
}

TEST_CASE("forward shapes: feature 128, projection 128") {
    RngStream rng(1, 0);
    SkeletonGraph graph = build_adjacency();
    for (EncoderPlan plan : {EncoderPlan::stgcn(), EncoderPlan::mlp()}) {
        auto enc = init_encoder_params(plan, 5);
        auto proj = init_projection_params(ProjectionPlan{}, 5);
        TapeF tape;
        auto ids = push_params(tape, enc);
        auto pids = push_params(tape, proj);
        int adj = tape.constant(graph.adjacency);
        int v = tape.leaf(random_window(rng), false);
        int h = encoder_forward(tape, v, plan, ids, adj);
        CHECK(tape.value(h).shape == std::vector<int>{1, 128});
        int z = projection_forward(tape, h, pids);
        CHECK(tape.value(z).shape == std::vector<int>{1, 128});
    }
}

TEST_CASE("batched forward equals per-window forward") {
    RngStream rng(2, 0);
    SkeletonGraph graph = build_adjacency();
    for (EncoderPlan plan : {EncoderPlan::stgcn(), EncoderPlan::mlp()}) {
        auto enc = init_encoder_params(plan, 11);
        const int batch = 5;
        std::vector<Tensor> windows;
        for (int s = 0; s < batch; ++s) windows.push_back(random_window(rng));

        Tensor stacked({batch * kWindowFrames, kNumJoints, 3});
        long per = static_cast<long>(kWindowFrames) * kNumJoints * 3;
        for (int s = 0; s < batch; ++s)
            std::copy(windows[s].data.begin(), windows[s].data.end(), stacked.data.begin() + s * per);

        TapeF tape;
        auto ids = push_params(tape, enc);
        int adj = tape.constant(graph.adjacency);
        int hb = encoder_forward_batched(tape, tape.leaf(stacked, false), batch, plan, ids, adj);
        const Tensor& hv = tape.value(hb);
        REQUIRE(hv.shape == std::vector<int>{batch, 128});

        for (int s = 0; s < batch; ++s) {
            Tensor single = encode_window(windows[s], enc, plan);
            for (int c = 0; c < 128; ++c) CHECK(hv.at(s, c) == doctest::Approx(single.at(c)).epsilon(1e-5));
        }
    }
}

TEST_CASE("encoders and projection pass finite-difference checks") {
    SkeletonGraph graph = build_adjacency();
    TensorD adj_d = graph.adjacency.cast<double>();

    for (int seed = 1; seed <= 10; ++seed) {
        RngStream rng(seed, RngStream::make_key(21, seed, 0));

        // ST-GCN: loss = mean(h^2) over all grad-carrying parameters + input
        {
            EncoderPlan plan = tiny_stgcn();
            auto params = init_encoder_params(plan, seed);
            std::vector<fd::TensorD> inputs;
            inputs.push_back(fd::random_tensor({kWindowFrames, kNumJoints, 3}, rng));
            for (const auto& p : params) {
                fd::TensorD t = p.value.cast<double>();
                for (auto& x : t.data) x += rng.uniform(-0.05, 0.05);  // biases off zero
                inputs.push_back(t);
            }
            auto fn = [&plan, &adj_d](fd::TapeD& t, const std::vector<int>& in) {
                int adj = t.constant(adj_d);
                std::vector<int> ids(in.begin() + 1, in.end());
                int h = encoder_forward(t, in[0], plan, ids, adj);
                return t.mean(t.mul(h, h));
            };
            auto r = fd::check_gradients(fn, inputs, 1e-5, 1e-6, 40);
            CHECK(r.max_rel_err < 1e-4);
        }

        // MLP encoder + projection head end to end
        {
            EncoderPlan plan = tiny_mlp();
            auto params = init_encoder_params(plan, seed);
            ProjectionPlan pp{6, 5, 4};
            auto proj = init_projection_params(pp, seed);
            std::vector<fd::TensorD> inputs;
            inputs.push_back(fd::random_tensor({kWindowFrames, kNumJoints, 3}, rng, -0.2, 0.2));
            size_t n_enc = params.size();
            for (const auto& p : params) {
                fd::TensorD t = p.value.cast<double>();
                for (auto& x : t.data) x += rng.uniform(-0.05, 0.05);
                inputs.push_back(t);
            }
            for (const auto& p : proj) {
                fd::TensorD t = p.value.cast<double>();
                for (auto& x : t.data) x += rng.uniform(-0.05, 0.05);
                inputs.push_back(t);
            }
            auto fn = [&plan, &adj_d, n_enc](fd::TapeD& t, const std::vector<int>& in) {
                int adj = t.constant(adj_d);
                std::vector<int> enc_ids(in.begin() + 1, in.begin() + 1 + n_enc);
                std::vector<int> proj_ids(in.begin() + 1 + n_enc, in.end());
                int h = encoder_forward(t, in[0], plan, enc_ids, adj);
                int z = projection_forward(t, h, proj_ids);
                return t.mean(t.mul(z, z));
            };
            auto r = fd::check_gradients(fn, inputs, 1e-5, 1e-6, 40);
            CHECK(r.max_rel_err < 1e-4);
        }
    }
}
