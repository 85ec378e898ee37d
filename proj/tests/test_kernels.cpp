#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "skelrep/kernels.hpp"
#include "skelrep/rng.hpp"

using namespace skelrep;

namespace {

// Independent naive oracles: triple loops in the textbook order, no blocking.

template <class T>
std::vector<T> naive_matmul(int m, int k, int n, const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> out(static_cast<size_t>(m) * n, T(0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int p = 0; p < k; ++p) acc += static_cast<double>(a[i * k + p]) * b[p * n + j];
            out[static_cast<size_t>(i) * n + j] = static_cast<T>(acc);
        }
    return out;
}

template <class T>
std::vector<T> naive_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const std::vector<T>& x,
                          const std::vector<T>& w) {
    int pad = (ksize - 1) / 2;
    int frames_out = (frames + stride - 1) / stride;
    std::vector<T> out(static_cast<size_t>(frames_out) * joints * cout, T(0));
    for (int to = 0; to < frames_out; ++to)
        for (int j = 0; j < joints; ++j)
            for (int co = 0; co < cout; ++co) {
                double acc = 0;
                for (int kk = 0; kk < ksize; ++kk) {
                    int ti = to * stride + kk - pad;
                    if (ti < 0 || ti >= frames) continue;
                    for (int ci = 0; ci < cin; ++ci)
                        acc += static_cast<double>(x[(static_cast<size_t>(ti) * joints + j) * cin + ci]) *
                               w[(static_cast<size_t>(kk) * cin + ci) * cout + co];
                }
                out[(static_cast<size_t>(to) * joints + j) * cout + co] = static_cast<T>(acc);
            }
    return out;
}

template <class T>
std::vector<T> random_vec(size_t n, RngStream& rng) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
    return v;
}

// |a - b| <= tol * max(1, |b|) elementwise
template <class T>
void check_close(const std::vector<T>& a, const std::vector<T>& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double err = std::fabs(static_cast<double>(a[i]) - b[i]);
        double scale = std::max(1.0, std::fabs(static_cast<double>(b[i])));
        CHECK(err <= tol * scale);
        if (err > tol * scale) return;  // stop after the first report
    }
}

struct Shape2 {
    int m, k, n;
};

}  // namespace

TEST_CASE("matmul matches a naive double oracle") {
    RngStream rng(11, 0);
    for (Shape2 s : {Shape2{1, 1, 1}, Shape2{3, 7, 5}, Shape2{15, 3, 32}, Shape2{50, 64, 128}, Shape2{33, 9, 17}}) {
        auto a = random_vec<double>(static_cast<size_t>(s.m) * s.k, rng);
        auto b = random_vec<double>(static_cast<size_t>(s.k) * s.n, rng);
        std::vector<double> out(static_cast<size_t>(s.m) * s.n);
        kernels::matmul(s.m, s.k, s.n, a.data(), b.data(), out.data());
        check_close(out, naive_matmul(s.m, s.k, s.n, a, b), 1e-12);
    }
}

TEST_CASE("matmul_acc adds on top of existing output") {
    RngStream rng(12, 0);
    int m = 6, k = 13, n = 9;
    auto a = random_vec<double>(static_cast<size_t>(m) * k, rng);
    auto b = random_vec<double>(static_cast<size_t>(k) * n, rng);
    auto base = random_vec<double>(static_cast<size_t>(m) * n, rng);
    auto out = base;
    kernels::matmul_acc(m, k, n, a.data(), b.data(), out.data());
    auto expect = naive_matmul(m, k, n, a, b);
    for (size_t i = 0; i < expect.size(); ++i) expect[i] += base[i];
    check_close(out, expect, 1e-12);
}

TEST_CASE("matmul_acc_at accumulates a^T b") {
    RngStream rng(13, 0);
    for (Shape2 s : {Shape2{5, 4, 3}, Shape2{64, 128, 256}, Shape2{7, 9, 1}, Shape2{750, 3, 32}}) {
        auto a = random_vec<double>(static_cast<size_t>(s.m) * s.k, rng);
        auto b = random_vec<double>(static_cast<size_t>(s.m) * s.n, rng);
        std::vector<double> out(static_cast<size_t>(s.k) * s.n, 0.0);
        kernels::matmul_acc_at(s.m, s.k, s.n, a.data(), b.data(), out.data());
        // oracle: transpose a explicitly, then naive matmul
        std::vector<double> at(static_cast<size_t>(s.k) * s.m);
        for (int i = 0; i < s.m; ++i)
            for (int p = 0; p < s.k; ++p) at[static_cast<size_t>(p) * s.m + i] = a[static_cast<size_t>(i) * s.k + p];
        check_close(out, naive_matmul(s.k, s.m, s.n, at, b), 1e-12);
    }
}

TEST_CASE("batched_matmul with and without broadcast") {
    RngStream rng(14, 0);
    int batch = 7, m = 15, k = 15, n = 32;
    auto a = random_vec<double>(static_cast<size_t>(batch) * m * k, rng);
    auto b = random_vec<double>(static_cast<size_t>(batch) * k * n, rng);
    std::vector<double> out(static_cast<size_t>(batch) * m * n);

    kernels::batched_matmul(batch, m, k, n, a.data(), b.data(), out.data(), false, false);
    for (int s = 0; s < batch; ++s) {
        std::vector<double> as(a.begin() + static_cast<size_t>(s) * m * k, a.begin() + static_cast<size_t>(s + 1) * m * k);
        std::vector<double> bs(b.begin() + static_cast<size_t>(s) * k * n, b.begin() + static_cast<size_t>(s + 1) * k * n);
        std::vector<double> os(out.begin() + static_cast<size_t>(s) * m * n, out.begin() + static_cast<size_t>(s + 1) * m * n);
        check_close(os, naive_matmul(m, k, n, as, bs), 1e-12);
    }

    // broadcast a: same left operand for every batch element
    std::vector<double> a0(a.begin(), a.begin() + static_cast<size_t>(m) * k);
    kernels::batched_matmul(batch, m, k, n, a0.data(), b.data(), out.data(), true, false);
    for (int s = 0; s < batch; ++s) {
        std::vector<double> bs(b.begin() + static_cast<size_t>(s) * k * n, b.begin() + static_cast<size_t>(s + 1) * k * n);
        std::vector<double> os(out.begin() + static_cast<size_t>(s) * m * n, out.begin() + static_cast<size_t>(s + 1) * m * n);
        check_close(os, naive_matmul(m, k, n, a0, bs), 1e-12);
    }

    // broadcast b: shared weight matrix
    std::vector<double> b0(b.begin(), b.begin() + static_cast<size_t>(k) * n);
    kernels::batched_matmul(batch, m, k, n, a.data(), b0.data(), out.data(), false, true);
    for (int s = 0; s < batch; ++s) {
        std::vector<double> as(a.begin() + static_cast<size_t>(s) * m * k, a.begin() + static_cast<size_t>(s + 1) * m * k);
        std::vector<double> os(out.begin() + static_cast<size_t>(s) * m * n, out.begin() + static_cast<size_t>(s + 1) * m * n);
        check_close(os, naive_matmul(m, k, n, as, b0), 1e-12);
    }
}

TEST_CASE("temporal_conv matches a naive oracle across strides") {
    RngStream rng(15, 0);
    for (int stride : {1, 2, 3}) {
        int frames = 50, joints = 15, cin = 8, cout = 16, ksize = 9;
        auto x = random_vec<double>(static_cast<size_t>(frames) * joints * cin, rng);
        auto w = random_vec<double>(static_cast<size_t>(ksize) * cin * cout, rng);
        int frames_out = (frames + stride - 1) / stride;
        std::vector<double> out(static_cast<size_t>(frames_out) * joints * cout);
        kernels::temporal_conv(frames, joints, cin, cout, ksize, stride, x.data(), w.data(), out.data());
        check_close(out, naive_conv(frames, joints, cin, cout, ksize, stride, x, w), 1e-12);
    }
}

TEST_CASE("temporal_conv gradients match a scatter oracle") {
    RngStream rng(16, 0);
    int frames = 25, joints = 15, cin = 6, cout = 10, ksize = 9, stride = 2;
    int pad = (ksize - 1) / 2;
    int frames_out = (frames + stride - 1) / stride;
    auto x = random_vec<double>(static_cast<size_t>(frames) * joints * cin, rng);
    auto w = random_vec<double>(static_cast<size_t>(ksize) * cin * cout, rng);
    auto dout = random_vec<double>(static_cast<size_t>(frames_out) * joints * cout, rng);

    // oracle: scatter every (to, j, co, kk, ci) contribution directly
    std::vector<double> gx_ref(x.size(), 0.0), gw_ref(w.size(), 0.0);
    for (int to = 0; to < frames_out; ++to)
        for (int j = 0; j < joints; ++j)
            for (int kk = 0; kk < ksize; ++kk) {
                int ti = to * stride + kk - pad;
                if (ti < 0 || ti >= frames) continue;
                for (int co = 0; co < cout; ++co) {
                    double g = dout[(static_cast<size_t>(to) * joints + j) * cout + co];
                    for (int ci = 0; ci < cin; ++ci) {
                        gx_ref[(static_cast<size_t>(ti) * joints + j) * cin + ci] +=
                            g * w[(static_cast<size_t>(kk) * cin + ci) * cout + co];
                        gw_ref[(static_cast<size_t>(kk) * cin + ci) * cout + co] +=
                            g * x[(static_cast<size_t>(ti) * joints + j) * cin + ci];
                    }
                }
            }

    std::vector<double> wt(static_cast<size_t>(ksize) * cout * cin);
    for (int kk = 0; kk < ksize; ++kk)
        for (int ci = 0; ci < cin; ++ci)
            for (int co = 0; co < cout; ++co)
                wt[(static_cast<size_t>(kk) * cout + co) * cin + ci] = w[(static_cast<size_t>(kk) * cin + ci) * cout + co];

    std::vector<double> gx(x.size(), 0.0), gw(w.size(), 0.0);
    kernels::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, dout.data(), wt.data(), gx.data());
    kernels::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, x.data(), dout.data(), gw.data());
    check_close(gx, gx_ref, 1e-12);
    check_close(gw, gw_ref, 1e-12);
}

TEST_CASE("OpenMP and serial paths agree bit for bit") {
    RngStream rng(17, 0);
    REQUIRE(kernels::parallel_enabled());

    auto bitwise_equal = [](const std::vector<float>& a, const std::vector<float>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return false;
        return true;
    };

    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng.uniform_int(70));
        int k = 1 + static_cast<int>(rng.uniform_int(70));
        int n = 1 + static_cast<int>(rng.uniform_int(70));
        auto a = random_vec<float>(static_cast<size_t>(m) * k, rng);
        auto b = random_vec<float>(static_cast<size_t>(k) * n, rng);
        auto c = random_vec<float>(static_cast<size_t>(m) * n, rng);

        std::vector<float> o_par(static_cast<size_t>(m) * n), o_ser(o_par);
        kernels::set_parallel(true);
        kernels::matmul(m, k, n, a.data(), b.data(), o_par.data());
        kernels::set_parallel(false);
        kernels::matmul(m, k, n, a.data(), b.data(), o_ser.data());
        CHECK(bitwise_equal(o_par, o_ser));

        auto acc_par = c, acc_ser = c;
        kernels::set_parallel(true);
        kernels::matmul_acc(m, k, n, a.data(), b.data(), acc_par.data());
        kernels::set_parallel(false);
        kernels::matmul_acc(m, k, n, a.data(), b.data(), acc_ser.data());
        CHECK(bitwise_equal(acc_par, acc_ser));

        auto bt = random_vec<float>(static_cast<size_t>(m) * n, rng);
        std::vector<float> at_par(static_cast<size_t>(k) * n, 0.f), at_ser(at_par);
        kernels::set_parallel(true);
        kernels::matmul_acc_at(m, k, n, a.data(), bt.data(), at_par.data());
        kernels::set_parallel(false);
        kernels::matmul_acc_at(m, k, n, a.data(), bt.data(), at_ser.data());
        CHECK(bitwise_equal(at_par, at_ser));
    }

    for (int trial = 0; trial < 10; ++trial) {
        int frames = 10 + static_cast<int>(rng.uniform_int(60));
        int joints = 15, cin = 1 + static_cast<int>(rng.uniform_int(16));
        int cout = 1 + static_cast<int>(rng.uniform_int(16));
        int ksize = 9, stride = 1 + static_cast<int>(rng.uniform_int(3));
        int frames_out = (frames + stride - 1) / stride;
        auto x = random_vec<float>(static_cast<size_t>(frames) * joints * cin, rng);
        auto w = random_vec<float>(static_cast<size_t>(ksize) * cin * cout, rng);
        auto dout = random_vec<float>(static_cast<size_t>(frames_out) * joints * cout, rng);
        std::vector<float> wt(static_cast<size_t>(ksize) * cout * cin);
        for (int kk = 0; kk < ksize; ++kk)
            for (int ci = 0; ci < cin; ++ci)
                for (int co = 0; co < cout; ++co)
                    wt[(static_cast<size_t>(kk) * cout + co) * cin + ci] =
                        w[(static_cast<size_t>(kk) * cin + ci) * cout + co];

        std::vector<float> c_par(static_cast<size_t>(frames_out) * joints * cout), c_ser(c_par);
        std::vector<float> gx_par(x.size(), 0.f), gx_ser(x.size(), 0.f);
        std::vector<float> gw_par(w.size(), 0.f), gw_ser(w.size(), 0.f);
        kernels::set_parallel(true);
        kernels::temporal_conv(frames, joints, cin, cout, ksize, stride, x.data(), w.data(), c_par.data());
        kernels::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, dout.data(), wt.data(), gx_par.data());
        kernels::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, x.data(), dout.data(), gw_par.data());
        kernels::set_parallel(false);
        kernels::temporal_conv(frames, joints, cin, cout, ksize, stride, x.data(), w.data(), c_ser.data());
        kernels::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, dout.data(), wt.data(), gx_ser.data());
        kernels::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, x.data(), dout.data(), gw_ser.data());
        CHECK(bitwise_equal(c_par, c_ser));
        CHECK(bitwise_equal(gx_par, gx_ser));
        CHECK(bitwise_equal(gw_par, gw_ser));
    }
    kernels::set_parallel(true);
}
