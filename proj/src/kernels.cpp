#include "skelrep/kernels.hpp"

#include <atomic>

namespace skelrep::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Every OpenMP loop splits an outer index that owns disjoint output rows and
// calls the same ref:: row worker, so results match the serial path bit for
// bit at any thread count.

template <class T>
void matmul_omp(int m, int k, int n, const T* a, const T* b, T* out) {
    int pairs = (m + 1) / 2;
#pragma omp parallel for schedule(static)
    for (int ip = 0; ip < pairs; ++ip) ref::matmul_rows(k, n, 2 * ip, std::min(2 * ip + 2, m), a, b, out, false);
}

template <class T>
void matmul_acc_omp(int m, int k, int n, const T* a, const T* b, T* out) {
    int pairs = (m + 1) / 2;
#pragma omp parallel for schedule(static)
    for (int ip = 0; ip < pairs; ++ip) ref::matmul_rows(k, n, 2 * ip, std::min(2 * ip + 2, m), a, b, out, true);
}

template <class T>
void matmul_acc_at_omp(int m, int k, int n, const T* a, const T* b, T* out) {
    int pairs = (k + 1) / 2;
#pragma omp parallel for schedule(static)
    for (int pp = 0; pp < pairs; ++pp) ref::matmul_at_rows(m, k, n, 2 * pp, std::min(2 * pp + 2, k), a, b, out);
}

template <class T>
void batched_matmul_omp(int batch, int m, int k, int n, const T* a, const T* b, T* out, bool ba, bool bb) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < batch; ++s) {
        const T* as = a + (ba ? 0 : static_cast<size_t>(s) * m * k);
        const T* bs = b + (bb ? 0 : static_cast<size_t>(s) * k * n);
        ref::matmul(m, k, n, as, bs, out + static_cast<size_t>(s) * m * n);
    }
}

template <class T>
void temporal_conv_omp(int frames, int joints, int cin, int cout, int ksize, int stride, const T* x, const T* w,
                       T* out) {
    int frames_out = (frames + stride - 1) / stride;
#pragma omp parallel for schedule(static)
    for (int to = 0; to < frames_out; ++to)
        ref::temporal_conv_frame(frames, joints, cin, cout, ksize, stride, to, x, w, out);
}

template <class T>
void temporal_conv_dx_omp(int frames, int joints, int cin, int cout, int ksize, int stride, const T* dout,
                          const T* wt, T* gx) {
    // gx rows are (ti, j); a pair of joint columns per thread keeps them
    // disjoint
    int pairs = (joints + 1) / 2;
#pragma omp parallel for schedule(static)
    for (int jp = 0; jp < pairs; ++jp)
        ref::temporal_conv_dx_joints(frames, joints, cin, cout, ksize, stride, 2 * jp,
                                     std::min(2 * jp + 2, joints), dout, wt, gx);
}

template <class T>
void temporal_conv_dw_omp(int frames, int joints, int cin, int cout, int ksize, int stride, const T* x, const T* dout,
                          T* gw) {
    // gw rows are (kk, ci); one kernel tap per thread keeps them disjoint
#pragma omp parallel for schedule(static)
    for (int kk = 0; kk < ksize; ++kk)
        ref::temporal_conv_dw_tap(frames, joints, cin, cout, ksize, stride, kk, x, dout, gw);
}

}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

#define SKELREP_DISPATCH(call_omp, call_ref) \
    if (parallel_enabled())                  \
        call_omp;                            \
    else                                     \
        call_ref;

void matmul(int m, int k, int n, const float* a, const float* b, float* out) {
    SKELREP_DISPATCH(matmul_omp(m, k, n, a, b, out), ref::matmul(m, k, n, a, b, out))
}
void matmul(int m, int k, int n, const double* a, const double* b, double* out) {
    SKELREP_DISPATCH(matmul_omp(m, k, n, a, b, out), ref::matmul(m, k, n, a, b, out))
}
void matmul_acc(int m, int k, int n, const float* a, const float* b, float* out) {
    SKELREP_DISPATCH(matmul_acc_omp(m, k, n, a, b, out), ref::matmul_acc(m, k, n, a, b, out))
}
void matmul_acc(int m, int k, int n, const double* a, const double* b, double* out) {
    SKELREP_DISPATCH(matmul_acc_omp(m, k, n, a, b, out), ref::matmul_acc(m, k, n, a, b, out))
}
void matmul_acc_at(int m, int k, int n, const float* a, const float* b, float* out) {
    SKELREP_DISPATCH(matmul_acc_at_omp(m, k, n, a, b, out), ref::matmul_acc_at(m, k, n, a, b, out))
}
void matmul_acc_at(int m, int k, int n, const double* a, const double* b, double* out) {
    SKELREP_DISPATCH(matmul_acc_at_omp(m, k, n, a, b, out), ref::matmul_acc_at(m, k, n, a, b, out))
}
void batched_matmul(int batch, int m, int k, int n, const float* a, const float* b, float* out, bool ba, bool bb) {
    SKELREP_DISPATCH(batched_matmul_omp(batch, m, k, n, a, b, out, ba, bb),
                     ref::batched_matmul(batch, m, k, n, a, b, out, ba, bb))
}
void batched_matmul(int batch, int m, int k, int n, const double* a, const double* b, double* out, bool ba, bool bb) {
    SKELREP_DISPATCH(batched_matmul_omp(batch, m, k, n, a, b, out, ba, bb),
                     ref::batched_matmul(batch, m, k, n, a, b, out, ba, bb))
}
void temporal_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const float* x, const float* w,
                   float* out) {
    SKELREP_DISPATCH(temporal_conv_omp(frames, joints, cin, cout, ksize, stride, x, w, out),
                     ref::temporal_conv(frames, joints, cin, cout, ksize, stride, x, w, out))
}
void temporal_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const double* x, const double* w,
                   double* out) {
    SKELREP_DISPATCH(temporal_conv_omp(frames, joints, cin, cout, ksize, stride, x, w, out),
                     ref::temporal_conv(frames, joints, cin, cout, ksize, stride, x, w, out))
}
void temporal_conv_dx(int frames, int joints, int cin, int cout, int ksize, int stride, const float* dout,
                      const float* wt, float* gx) {
    SKELREP_DISPATCH(temporal_conv_dx_omp(frames, joints, cin, cout, ksize, stride, dout, wt, gx),
                     ref::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, dout, wt, gx))
}
void temporal_conv_dx(int frames, int joints, int cin, int cout, int ksize, int stride, const double* dout,
                      const double* wt, double* gx) {
    SKELREP_DISPATCH(temporal_conv_dx_omp(frames, joints, cin, cout, ksize, stride, dout, wt, gx),
                     ref::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, dout, wt, gx))
}
void temporal_conv_dw(int frames, int joints, int cin, int cout, int ksize, int stride, const float* x,
                      const float* dout, float* gw) {
    SKELREP_DISPATCH(temporal_conv_dw_omp(frames, joints, cin, cout, ksize, stride, x, dout, gw),
                     ref::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, x, dout, gw))
}
void temporal_conv_dw(int frames, int joints, int cin, int cout, int ksize, int stride, const double* x,
                      const double* dout, double* gw) {
    SKELREP_DISPATCH(temporal_conv_dw_omp(frames, joints, cin, cout, ksize, stride, x, dout, gw),
                     ref::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, x, dout, gw))
}

#undef SKELREP_DISPATCH

}  // namespace skelrep::kernels
