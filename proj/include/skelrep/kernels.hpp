#pragma once

#include <cstddef>
#include <algorithm>
#include <vector>

namespace skelrep::kernels {

// Serial reference kernels. Kept as the correctness baseline: the OpenMP
// variants split the outer loop across threads and call the same row workers,
// so every output element sees the identical accumulation sequence and the
// results are bit-identical for any thread count.
//
// Inner loops run in axpy order (contiguous over the last axis of both the
// streamed operand and the output) and block the reduction dimension by four;
// the per-element accumulation order stays ascending, only the load/store
// traffic per FMA drops.
namespace ref {

template <class T>
inline void matmul_row(int k, int n, const T* __restrict arow, const T* __restrict b, T* __restrict orow,
                       bool accumulate) {
    if (!accumulate)
        for (int j = 0; j < n; ++j) orow[j] = T(0);
    int p = 0;
    for (; p + 4 <= k; p += 4) {
        T a0 = arow[p], a1 = arow[p + 1], a2 = arow[p + 2], a3 = arow[p + 3];
        const T* b0 = b + static_cast<size_t>(p) * n;
        const T* b1 = b0 + n;
        const T* b2 = b1 + n;
        const T* b3 = b2 + n;
        for (int j = 0; j < n; ++j) orow[j] = ((((orow[j] + a0 * b0[j]) + a1 * b1[j]) + a2 * b2[j]) + a3 * b3[j]);
    }
    for (; p < k; ++p) {
        T av = arow[p];
        const T* brow = b + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
}

// two output rows sharing one pass over b; same per-element order as two
// matmul_row calls
template <class T>
inline void matmul_row2(int k, int n, const T* __restrict arow0, const T* __restrict arow1, const T* __restrict b,
                        T* __restrict orow0, T* __restrict orow1, bool accumulate) {
    if (!accumulate)
        for (int j = 0; j < n; ++j) orow0[j] = orow1[j] = T(0);
    int p = 0;
    for (; p + 4 <= k; p += 4) {
        T a00 = arow0[p], a01 = arow0[p + 1], a02 = arow0[p + 2], a03 = arow0[p + 3];
        T a10 = arow1[p], a11 = arow1[p + 1], a12 = arow1[p + 2], a13 = arow1[p + 3];
        const T* b0 = b + static_cast<size_t>(p) * n;
        const T* b1 = b0 + n;
        const T* b2 = b1 + n;
        const T* b3 = b2 + n;
        for (int j = 0; j < n; ++j) {
            orow0[j] = ((((orow0[j] + a00 * b0[j]) + a01 * b1[j]) + a02 * b2[j]) + a03 * b3[j]);
            orow1[j] = ((((orow1[j] + a10 * b0[j]) + a11 * b1[j]) + a12 * b2[j]) + a13 * b3[j]);
        }
    }
    for (; p < k; ++p) {
        T a0 = arow0[p], a1 = arow1[p];
        const T* brow = b + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) {
            orow0[j] += a0 * brow[j];
            orow1[j] += a1 * brow[j];
        }
    }
}

// rows [i0, i1) of a matmul, pairwise where possible
template <class T>
inline void matmul_rows(int k, int n, int i0, int i1, const T* __restrict a, const T* __restrict b,
                        T* __restrict out, bool accumulate) {
    int i = i0;
    for (; i + 2 <= i1; i += 2)
        matmul_row2(k, n, a + static_cast<size_t>(i) * k, a + static_cast<size_t>(i + 1) * k, b,
                    out + static_cast<size_t>(i) * n, out + static_cast<size_t>(i + 1) * n, accumulate);
    for (; i < i1; ++i)
        matmul_row(k, n, a + static_cast<size_t>(i) * k, b, out + static_cast<size_t>(i) * n, accumulate);
}

// out = a (m x k) * b (k x n)
template <class T>
void matmul(int m, int k, int n, const T* __restrict a, const T* __restrict b, T* __restrict out) {
    matmul_rows(k, n, 0, m, a, b, out, false);
}

// out += a (m x k) * b (k x n)
template <class T>
void matmul_acc(int m, int k, int n, const T* __restrict a, const T* __restrict b, T* __restrict out) {
    matmul_rows(k, n, 0, m, a, b, out, true);
}

// one output row (index p) of out += a^T * b, streaming rows i of a and b
template <class T>
inline void matmul_at_row(int m, int k, int n, int p, const T* __restrict a, const T* __restrict b,
                          T* __restrict orow) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        T a0 = a[static_cast<size_t>(i) * k + p], a1 = a[static_cast<size_t>(i + 1) * k + p];
        T a2 = a[static_cast<size_t>(i + 2) * k + p], a3 = a[static_cast<size_t>(i + 3) * k + p];
        const T* b0 = b + static_cast<size_t>(i) * n;
        const T* b1 = b0 + n;
        const T* b2 = b1 + n;
        const T* b3 = b2 + n;
        for (int j = 0; j < n; ++j) orow[j] = ((((orow[j] + a0 * b0[j]) + a1 * b1[j]) + a2 * b2[j]) + a3 * b3[j]);
    }
    for (; i < m; ++i) {
        T av = a[static_cast<size_t>(i) * k + p];
        const T* brow = b + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
}

// two adjacent output rows (p, p+1) of out += a^T * b on one pass over b
template <class T>
inline void matmul_at_row2(int m, int k, int n, int p, const T* __restrict a, const T* __restrict b,
                           T* __restrict orow0, T* __restrict orow1) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const T* ap = a + static_cast<size_t>(i) * k + p;
        T a00 = ap[0], a01 = ap[k], a02 = ap[2 * k], a03 = ap[3 * k];
        T a10 = ap[1], a11 = ap[k + 1], a12 = ap[2 * k + 1], a13 = ap[3 * k + 1];
        const T* b0 = b + static_cast<size_t>(i) * n;
        const T* b1 = b0 + n;
        const T* b2 = b1 + n;
        const T* b3 = b2 + n;
        for (int j = 0; j < n; ++j) {
            orow0[j] = ((((orow0[j] + a00 * b0[j]) + a01 * b1[j]) + a02 * b2[j]) + a03 * b3[j]);
            orow1[j] = ((((orow1[j] + a10 * b0[j]) + a11 * b1[j]) + a12 * b2[j]) + a13 * b3[j]);
        }
    }
    for (; i < m; ++i) {
        T a0 = a[static_cast<size_t>(i) * k + p], a1 = a[static_cast<size_t>(i) * k + p + 1];
        const T* brow = b + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            orow0[j] += a0 * brow[j];
            orow1[j] += a1 * brow[j];
        }
    }
}

// rows [p0, p1) of a^T * b accumulation, pairwise where possible
template <class T>
inline void matmul_at_rows(int m, int k, int n, int p0, int p1, const T* __restrict a, const T* __restrict b,
                           T* __restrict out) {
    int p = p0;
    for (; p + 2 <= p1; p += 2)
        matmul_at_row2(m, k, n, p, a, b, out + static_cast<size_t>(p) * n, out + static_cast<size_t>(p + 1) * n);
    for (; p < p1; ++p) matmul_at_row(m, k, n, p, a, b, out + static_cast<size_t>(p) * n);
}

// out += a^T (k x m, stored m x k) * b (m x n)
template <class T>
void matmul_acc_at(int m, int k, int n, const T* __restrict a, const T* __restrict b, T* __restrict out) {
    matmul_at_rows(m, k, n, 0, k, a, b, out);
}

// batch of B independent (m x k)(k x n) products
template <class T>
void batched_matmul(int batch, int m, int k, int n, const T* a, const T* b, T* out, bool broadcast_a,
                    bool broadcast_b) {
    for (int s = 0; s < batch; ++s) {
        const T* as = a + (broadcast_a ? 0 : static_cast<size_t>(s) * m * k);
        const T* bs = b + (broadcast_b ? 0 : static_cast<size_t>(s) * k * n);
        matmul(m, k, n, as, bs, out + static_cast<size_t>(s) * m * n);
    }
}

// one output frame of the temporal convolution; x {T,J,C}, w {K,C,Co}
template <class T>
inline void temporal_conv_frame(int frames, int joints, int cin, int cout, int ksize, int stride, int to,
                                const T* __restrict x, const T* __restrict w, T* __restrict out) {
    int pad = (ksize - 1) / 2;
    T* __restrict oframe = out + static_cast<size_t>(to) * joints * cout;
    for (int c = 0; c < joints * cout; ++c) oframe[c] = T(0);
    for (int kk = 0; kk < ksize; ++kk) {
        int ti = to * stride + kk - pad;
        if (ti < 0 || ti >= frames) continue;
        const T* xframe = x + static_cast<size_t>(ti) * joints * cin;
        const T* wtap = w + static_cast<size_t>(kk) * cin * cout;
        int j = 0;
        for (; j + 2 <= joints; j += 2)
            matmul_row2(cin, cout, xframe + static_cast<size_t>(j) * cin, xframe + static_cast<size_t>(j + 1) * cin,
                        wtap, oframe + static_cast<size_t>(j) * cout, oframe + static_cast<size_t>(j + 1) * cout, true);
        for (; j < joints; ++j)
            matmul_row(cin, cout, xframe + static_cast<size_t>(j) * cin, wtap, oframe + static_cast<size_t>(j) * cout,
                       true);
    }
}

// x: {T,J,C}, w: {K,C,Co}, zero padding (K-1)/2, stride over the frame axis.
// out: {To,J,Co} with To = ceil(T/stride).
template <class T>
void temporal_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const T* __restrict x,
                   const T* __restrict w, T* __restrict out) {
    int frames_out = (frames + stride - 1) / stride;
    for (int to = 0; to < frames_out; ++to)
        temporal_conv_frame(frames, joints, cin, cout, ksize, stride, to, x, w, out);
}

// all gx rows of one joint column j; wt is w transposed to {K,Co,C}
template <class T>
inline void temporal_conv_dx_joint(int frames, int joints, int cin, int cout, int ksize, int stride, int j,
                                   const T* __restrict dout, const T* __restrict wt, T* __restrict gx) {
    int pad = (ksize - 1) / 2;
    int frames_out = (frames + stride - 1) / stride;
    for (int to = 0; to < frames_out; ++to) {
        const T* gorow = dout + (static_cast<size_t>(to) * joints + j) * cout;
        for (int kk = 0; kk < ksize; ++kk) {
            int ti = to * stride + kk - pad;
            if (ti < 0 || ti >= frames) continue;
            matmul_row(cout, cin, gorow, wt + static_cast<size_t>(kk) * cout * cin,
                       gx + (static_cast<size_t>(ti) * joints + j) * cin, true);
        }
    }
}

// joint columns j and j+1 together, sharing each pass over the weight tap
template <class T>
inline void temporal_conv_dx_joint2(int frames, int joints, int cin, int cout, int ksize, int stride, int j,
                                    const T* __restrict dout, const T* __restrict wt, T* __restrict gx) {
    int pad = (ksize - 1) / 2;
    int frames_out = (frames + stride - 1) / stride;
    for (int to = 0; to < frames_out; ++to) {
        const T* gorow0 = dout + (static_cast<size_t>(to) * joints + j) * cout;
        const T* gorow1 = gorow0 + cout;
        for (int kk = 0; kk < ksize; ++kk) {
            int ti = to * stride + kk - pad;
            if (ti < 0 || ti >= frames) continue;
            matmul_row2(cout, cin, gorow0, gorow1, wt + static_cast<size_t>(kk) * cout * cin,
                        gx + (static_cast<size_t>(ti) * joints + j) * cin,
                        gx + (static_cast<size_t>(ti) * joints + j + 1) * cin, true);
        }
    }
}

// joint columns [j0, j1), pairwise where possible
template <class T>
inline void temporal_conv_dx_joints(int frames, int joints, int cin, int cout, int ksize, int stride, int j0, int j1,
                                    const T* __restrict dout, const T* __restrict wt, T* __restrict gx) {
    int j = j0;
    for (; j + 2 <= j1; j += 2) temporal_conv_dx_joint2(frames, joints, cin, cout, ksize, stride, j, dout, wt, gx);
    for (; j < j1; ++j) temporal_conv_dx_joint(frames, joints, cin, cout, ksize, stride, j, dout, wt, gx);
}

// gx += conv backward wrt input
template <class T>
void temporal_conv_dx(int frames, int joints, int cin, int cout, int ksize, int stride, const T* __restrict dout,
                      const T* __restrict wt, T* __restrict gx) {
    temporal_conv_dx_joints(frames, joints, cin, cout, ksize, stride, 0, joints, dout, wt, gx);
}

// gw rows of one kernel tap kk: dW_kk += X_kk^T dOut over the valid (to, j)
// pairs, packed contiguously so the transposed-matmul worker can block rows
template <class T>
inline void temporal_conv_dw_tap(int frames, int joints, int cin, int cout, int ksize, int stride, int kk,
                                 const T* __restrict x, const T* __restrict dout, T* __restrict gw) {
    int pad = (ksize - 1) / 2;
    int frames_out = (frames + stride - 1) / stride;
    std::vector<T> xbuf(static_cast<size_t>(frames_out) * joints * cin);
    std::vector<T> gbuf(static_cast<size_t>(frames_out) * joints * cout);
    int rows = 0;
    for (int to = 0; to < frames_out; ++to) {
        int ti = to * stride + kk - pad;
        if (ti < 0 || ti >= frames) continue;
        for (int j = 0; j < joints; ++j) {
            const T* xp = x + (static_cast<size_t>(ti) * joints + j) * cin;
            const T* gorow = dout + (static_cast<size_t>(to) * joints + j) * cout;
            std::copy(xp, xp + cin, xbuf.begin() + static_cast<size_t>(rows) * cin);
            std::copy(gorow, gorow + cout, gbuf.begin() + static_cast<size_t>(rows) * cout);
            ++rows;
        }
    }
    matmul_acc_at(rows, cin, cout, xbuf.data(), gbuf.data(), gw + static_cast<size_t>(kk) * cin * cout);
}

// gw += conv backward wrt weights
template <class T>
void temporal_conv_dw(int frames, int joints, int cin, int cout, int ksize, int stride, const T* __restrict x,
                      const T* __restrict dout, T* __restrict gw) {
    for (int kk = 0; kk < ksize; ++kk)
        temporal_conv_dw_tap(frames, joints, cin, cout, ksize, stride, kk, x, dout, gw);
}

}  // namespace ref

// Toggle for the OpenMP paths; loops that already parallelize over samples
// can switch it off to avoid nested parallel regions.
void set_parallel(bool enabled);
bool parallel_enabled();

void matmul(int m, int k, int n, const float* a, const float* b, float* out);
void matmul(int m, int k, int n, const double* a, const double* b, double* out);
void matmul_acc(int m, int k, int n, const float* a, const float* b, float* out);
void matmul_acc(int m, int k, int n, const double* a, const double* b, double* out);
void matmul_acc_at(int m, int k, int n, const float* a, const float* b, float* out);
void matmul_acc_at(int m, int k, int n, const double* a, const double* b, double* out);
void batched_matmul(int batch, int m, int k, int n, const float* a, const float* b, float* out, bool broadcast_a,
                    bool broadcast_b);
void batched_matmul(int batch, int m, int k, int n, const double* a, const double* b, double* out, bool broadcast_a,
                    bool broadcast_b);
void temporal_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const float* x, const float* w,
                   float* out);
void temporal_conv(int frames, int joints, int cin, int cout, int ksize, int stride, const double* x, const double* w,
                   double* out);
void temporal_conv_dx(int frames, int joints, int cin, int cout, int ksize, int stride, const float* dout,
                      const float* wt, float* gx);
void temporal_conv_dx(int frames, int joints, int cin, int cout, int ksize, int stride, const double* dout,
                      const double* wt, double* gx);
void temporal_conv_dw(int frames, int joints, int cin, int cout, int ksize, int stride, const float* x,
                      const float* dout, float* gw);
void temporal_conv_dw(int frames, int joints, int cin, int cout, int ksize, int stride, const double* x,
                      const double* dout, double* gw);

}  // namespace skelrep::kernels
