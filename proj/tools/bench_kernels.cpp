// Benchmarks the dispatching kernels against the serial reference they are
// verified against, at the shapes the training loop actually uses. Also
// asserts bit-identical outputs between the two paths on every shape.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "skelrep/kernels.hpp"
#include "skelrep/rng.hpp"

using namespace skelrep;

namespace {

using Clock = std::chrono::steady_clock;

std::vector<float> random_buf(long n, RngStream& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

double time_of(const std::function<void()>& fn, long reps) {
    fn();  // warm up
    auto t0 = Clock::now();
    for (long r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / reps * 1e6;  // us/call
}

}  // namespace

int main() {
    RngStream rng(42, 0);

    // training-loop shapes: feature-batch matmuls from the projection head and
    // the widest ST-GCN temporal convolution (block 1: 32 channels, 50 frames)
    const int B = 128;
    std::vector<float> a = random_buf(512L * 512, rng);
    std::vector<float> b = random_buf(512L * 512, rng);
    std::vector<float> out(512L * 512);

    const int T = 50, J = 15, Cin = 32, Cout = 32, K = 9;
    std::vector<float> x = random_buf(static_cast<long>(J) * T * Cin, rng);
    std::vector<float> w = random_buf(static_cast<long>(K) * Cin * Cout, rng);
    std::vector<float> conv_out(static_cast<long>(J) * T * Cout);
    std::vector<float> dout = random_buf(conv_out.size(), rng);
    std::vector<float> dx(x.size());
    std::vector<float> dw(w.size());

    auto zero = [](std::vector<float>& v) { std::memset(v.data(), 0, v.size() * sizeof(float)); };

    struct Row {
        const char* name;
        long reps;
        std::function<void()> run;
        std::vector<float>* out;
    };
    std::vector<Row> rows = {
        {"matmul 128x256x256", 200, [&] { kernels::matmul(B, 256, 256, a.data(), b.data(), out.data()); }, &out},
        {"matmul_acc 128x256x256", 200,
         [&] {
             zero(out);
             kernels::matmul_acc(B, 256, 256, a.data(), b.data(), out.data());
         },
         &out},
        {"matmul_acc_at 128^T 256x256", 200,
         [&] {
             zero(out);
             kernels::matmul_acc_at(B, 256, 256, a.data(), b.data(), out.data());
         },
         &out},
        {"batched_matmul 15x(50x32x32)", 200,
         [&] { kernels::batched_matmul(J, T, Cin, Cout, x.data(), b.data(), conv_out.data(), false, true); },
         &conv_out},
        {"temporal_conv 15j 50f 32->32 k9", 200,
         [&] { kernels::temporal_conv(T, J, Cin, Cout, K, 1, x.data(), w.data(), conv_out.data()); }, &conv_out},
        {"temporal_conv_dx", 200,
         [&] {
             zero(dx);
             kernels::temporal_conv_dx(T, J, Cin, Cout, K, 1, dout.data(), w.data(), dx.data());
         },
         &dx},
        {"temporal_conv_dw", 200,
         [&] {
             zero(dw);
             kernels::temporal_conv_dw(T, J, Cin, Cout, K, 1, x.data(), dout.data(), dw.data());
         },
         &dw},
    };

    std::printf("%-34s %12s %12s %9s %6s\n", "kernel", "serial us", "parallel us", "speedup", "exact");
    int status = 0;
    for (auto& row : rows) {
        kernels::set_parallel(false);
        double serial_us = time_of(row.run, row.reps);
        std::vector<float> serial_result = *row.out;

        kernels::set_parallel(true);
        double parallel_us = time_of(row.run, row.reps);
        bool exact = std::memcmp(row.out->data(), serial_result.data(), serial_result.size() * sizeof(float)) == 0;

        std::printf("%-34s %12.2f %12.2f %8.2fx %6s\n", row.name, serial_us, parallel_us, serial_us / parallel_us,
                    exact ? "yes" : "NO");
        if (!exact) {
            std::fprintf(stderr, "bit-exactness violated for %s\n", row.name);
            status = 1;
        }
    }
    kernels::set_parallel(true);
    return status;
}
