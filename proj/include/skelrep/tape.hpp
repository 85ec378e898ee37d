#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "skelrep/kernels.hpp"
#include "skelrep/tensor.hpp"

namespace skelrep {

// Reverse-mode tape over dense tensors. Nodes are appended in topological
// order; backward walks them in reverse and accumulates into parent grads.
// Float for training, double for finite-difference checks.
template <class T>
class Tape {
public:
    using Tensor = TensorT<T>;

    int leaf(Tensor v, bool needs_grad = true) {
        nodes_.push_back(Node{std::move(v), {}, {}, needs_grad, {}});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int constant(Tensor v) { return leaf(std::move(v), false); }

    const Tensor& value(int id) const { return nodes_.at(id).value; }
    Tensor& grad(int id) { return ensure_grad(nodes_.at(id)); }
    size_t size() const { return nodes_.size(); }

    // ---- elementwise ----

    int add(int a, int b) {
        check_same("add", a, b);
        Tensor out = value(a);
        for (long i = 0; i < out.numel(); ++i) out.at(i) += value(b).at(i);
        return record(std::move(out), {a, b}, [](Tape& t, Node& n) {
            t.accumulate(n.parents[0], n.grad.data.data());
            t.accumulate(n.parents[1], n.grad.data.data());
        });
    }

    int sub(int a, int b) {
        check_same("sub", a, b);
        Tensor out = value(a);
        for (long i = 0; i < out.numel(); ++i) out.at(i) -= value(b).at(i);
        return record(std::move(out), {a, b}, [](Tape& t, Node& n) {
            t.accumulate(n.parents[0], n.grad.data.data());
            Tensor& gb = t.ensure_grad(t.nodes_[n.parents[1]]);
            for (long i = 0; i < n.grad.numel(); ++i) gb.at(i) -= n.grad.at(i);
        });
    }

    int mul(int a, int b) {
        check_same("mul", a, b);
        Tensor out = value(a);
        for (long i = 0; i < out.numel(); ++i) out.at(i) *= value(b).at(i);
        return record(std::move(out), {a, b}, [](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            const Tensor& vb = t.value(n.parents[1]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            Tensor& gb = t.ensure_grad(t.nodes_[n.parents[1]]);
            for (long i = 0; i < n.grad.numel(); ++i) {
                ga.at(i) += n.grad.at(i) * vb.at(i);
                gb.at(i) += n.grad.at(i) * va.at(i);
            }
        });
    }

    int scale(int a, T c) {
        Tensor out = value(a);
        for (auto& x : out.data) x *= c;
        return record(std::move(out), {a}, [c](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (long i = 0; i < n.grad.numel(); ++i) ga.at(i) += c * n.grad.at(i);
        });
    }

    int relu(int a) {
        Tensor out = value(a);
        for (auto& x : out.data) x = x > T(0) ? x : T(0);
        return record(std::move(out), {a}, [](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (long i = 0; i < n.grad.numel(); ++i)
                if (va.at(i) > T(0)) ga.at(i) += n.grad.at(i);
        });
    }

    int logop(int a) {
        Tensor out = value(a);
        for (auto& x : out.data) x = std::log(x);
        return record(std::move(out), {a}, [](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (long i = 0; i < n.grad.numel(); ++i) ga.at(i) += n.grad.at(i) / va.at(i);
        });
    }

    // broadcast bias over the last dimension
    int add_bias(int x, int b) {
        const Tensor& vx = value(x);
        const Tensor& vb = value(b);
        int c = vx.shape.back();
        if (vb.ndim() != 1 || vb.dim(0) != c)
            shape_error("add_bias", vx.shape, vb.shape);
        Tensor out = vx;
        long rows = out.numel() / c;
        for (long r = 0; r < rows; ++r)
            for (int i = 0; i < c; ++i) out.at(r * c + i) += vb.at(i);
        return record(std::move(out), {x, b}, [c](Tape& t, Node& n) {
            t.accumulate(n.parents[0], n.grad.data.data());
            Tensor& gb = t.ensure_grad(t.nodes_[n.parents[1]]);
            long rows = n.grad.numel() / c;
            for (long r = 0; r < rows; ++r)
                for (int i = 0; i < c; ++i) gb.at(i) += n.grad.at(r * c + i);
        });
    }

    // ---- shape ----

    int reshape(int a, std::vector<int> shape) {
        const Tensor& va = value(a);
        if (Tensor::numel_of(shape) != va.numel()) shape_error("reshape", va.shape, shape);
        Tensor out(shape, va.data);
        return record(std::move(out), {a}, [](Tape& t, Node& n) { t.accumulate(n.parents[0], n.grad.data.data()); });
    }

    int transpose(int a) {
        const Tensor& va = value(a);
        if (va.ndim() != 2) shape_error("transpose", va.shape, {});
        int m = va.dim(0), k = va.dim(1);
        Tensor out({k, m});
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) out.at(j, i) = va.at(i, j);
        return record(std::move(out), {a}, [m, k](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) ga.at(i, j) += n.grad.at(j, i);
        });
    }

    // stack 2-D blocks with equal column counts
    int concat_rows(const std::vector<int>& parts) {
        if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
        int c = value(parts[0]).dim(1);
        int rows = 0;
        for (int p : parts) {
            const Tensor& v = value(p);
            if (v.ndim() != 2 || v.dim(1) != c) shape_error("concat_rows", v.shape, {rows, c});
            rows += v.dim(0);
        }
        Tensor out({rows, c});
        long off = 0;
        for (int p : parts) {
            const Tensor& v = value(p);
            std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
            off += v.numel();
        }
        return record(std::move(out), parts, [](Tape& t, Node& n) {
            long off = 0;
            for (int p : n.parents) {
                Tensor& gp = t.ensure_grad(t.nodes_[p]);
                for (long i = 0; i < gp.numel(); ++i) gp.at(i) += n.grad.at(off + i);
                off += gp.numel();
            }
        });
    }

    // ---- reductions ----

    int sum(int a) {
        T acc = 0;
        for (T x : value(a).data) acc += x;
        Tensor out({1});
        out.at(0) = acc;
        return record(std::move(out), {a}, [](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (auto& g : ga.data) g += n.grad.at(0);
        });
    }

    int mean(int a) {
        long count = value(a).numel();
        T acc = 0;
        for (T x : value(a).data) acc += x;
        Tensor out({1});
        out.at(0) = acc / static_cast<T>(count);
        return record(std::move(out), {a}, [count](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            T g = n.grad.at(0) / static_cast<T>(count);
            for (auto& x : ga.data) x += g;
        });
    }

    // {R,C} -> {1,C}
    int mean_rows(int a) {
        const Tensor& va = value(a);
        if (va.ndim() != 2) shape_error("mean_rows", va.shape, {});
        int r = va.dim(0), c = va.dim(1);
        Tensor out({1, c});
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) out.at(0, j) += va.at(i, j);
        for (int j = 0; j < c; ++j) out.at(0, j) /= static_cast<T>(r);
        return record(std::move(out), {a}, [r, c](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) ga.at(i, j) += n.grad.at(0, j) / static_cast<T>(r);
        });
    }

    // {G*R,C} -> {G,C}: mean over each group of R consecutive rows
    int mean_rows_grouped(int a, int group_rows) {
        const Tensor& va = value(a);
        if (va.ndim() != 2 || group_rows <= 0 || va.dim(0) % group_rows != 0) shape_error("mean_rows_grouped", va.shape, {});
        int groups = va.dim(0) / group_rows, c = va.dim(1);
        Tensor out({groups, c});
        for (int g = 0; g < groups; ++g) {
            for (int i = 0; i < group_rows; ++i)
                for (int j = 0; j < c; ++j) out.at(g, j) += va.at(g * group_rows + i, j);
            for (int j = 0; j < c; ++j) out.at(g, j) /= static_cast<T>(group_rows);
        }
        return record(std::move(out), {a}, [groups, group_rows, c](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int g = 0; g < groups; ++g)
                for (int i = 0; i < group_rows; ++i)
                    for (int j = 0; j < c; ++j)
                        ga.at(g * group_rows + i, j) += n.grad.at(g, j) / static_cast<T>(group_rows);
        });
    }

    // ---- linear algebra ----

    int matmul(int a, int b) {
        const Tensor& va = value(a);
        const Tensor& vb = value(b);
        if (va.ndim() != 2 || vb.ndim() != 2 || va.dim(1) != vb.dim(0)) shape_error("matmul", va.shape, vb.shape);
        int m = va.dim(0), k = va.dim(1), n2 = vb.dim(1);
        Tensor out({m, n2});
        kernels::matmul(m, k, n2, va.data.data(), vb.data.data(), out.data.data());
        return record(std::move(out), {a, b}, [m, k, n2](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            const Tensor& vb = t.value(n.parents[1]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            Tensor& gb = t.ensure_grad(t.nodes_[n.parents[1]]);
            // dA += dOut * B^T ; dB += A^T * dOut
            Tensor bt({n2, k});
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < n2; ++j) bt.at(j, i) = vb.at(i, j);
            kernels::matmul_acc(m, n2, k, n.grad.data.data(), bt.data.data(), ga.data.data());
            kernels::matmul_acc_at(m, k, n2, va.data.data(), n.grad.data.data(), gb.data.data());
        });
    }

    // {B,M,K} x {B,K,N}; a 2-D operand broadcasts across the batch
    int batched_matmul(int a, int b) {
        const Tensor& va = value(a);
        const Tensor& vb = value(b);
        bool ba = va.ndim() == 2, bb = vb.ndim() == 2;
        if ((va.ndim() != 2 && va.ndim() != 3) || (vb.ndim() != 2 && vb.ndim() != 3) || (ba && bb))
            shape_error("batched_matmul", va.shape, vb.shape);
        int batch = ba ? vb.dim(0) : va.dim(0);
        int m = ba ? va.dim(0) : va.dim(1);
        int k = ba ? va.dim(1) : va.dim(2);
        int kb = bb ? vb.dim(0) : vb.dim(1);
        int n2 = bb ? vb.dim(1) : vb.dim(2);
        if (k != kb || (!ba && !bb && va.dim(0) != vb.dim(0))) shape_error("batched_matmul", va.shape, vb.shape);
        Tensor out({batch, m, n2});
        kernels::batched_matmul(batch, m, k, n2, va.data.data(), vb.data.data(), out.data.data(), ba, bb);
        return record(std::move(out), {a, b}, [batch, m, k, n2, ba, bb](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            const Tensor& vb = t.value(n.parents[1]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            Tensor& gb = t.ensure_grad(t.nodes_[n.parents[1]]);
            // accumulate per batch element in fixed order; dA_s += dOut_s B_s^T
            // needs B transposed, dB_s += A_s^T dOut_s streams rows directly
            Tensor bt({bb ? 1 : batch, n2, k});
            for (int s = 0; s < (bb ? 1 : batch); ++s) {
                const T* bs = vb.data.data() + static_cast<size_t>(s) * k * n2;
                T* bts = bt.data.data() + static_cast<size_t>(s) * k * n2;
                for (int p = 0; p < k; ++p)
                    for (int j = 0; j < n2; ++j) bts[static_cast<size_t>(j) * k + p] = bs[static_cast<size_t>(p) * n2 + j];
            }
            for (int s = 0; s < batch; ++s) {
                const T* as = va.data.data() + (ba ? 0 : static_cast<size_t>(s) * m * k);
                const T* bts = bt.data.data() + (bb ? 0 : static_cast<size_t>(s) * k * n2);
                const T* go = n.grad.data.data() + static_cast<size_t>(s) * m * n2;
                T* gas = ga.data.data() + (ba ? 0 : static_cast<size_t>(s) * m * k);
                T* gbs = gb.data.data() + (bb ? 0 : static_cast<size_t>(s) * k * n2);
                kernels::matmul_acc(m, n2, k, go, bts, gas);
                kernels::matmul_acc_at(m, k, n2, as, go, gbs);
            }
        });
    }

    // x {T,J,Cin}, w {K,Cin,Cout}, zero padding (K-1)/2, stride over frames
    int temporal_conv(int x, int w, int stride) {
        const Tensor& vx = value(x);
        const Tensor& vw = value(w);
        if (vx.ndim() != 3 || vw.ndim() != 3 || vx.dim(2) != vw.dim(1)) shape_error("temporal_conv", vx.shape, vw.shape);
        int frames = vx.dim(0), joints = vx.dim(1), cin = vx.dim(2);
        int ksize = vw.dim(0), cout = vw.dim(2);
        int frames_out = (frames + stride - 1) / stride;
        Tensor out({frames_out, joints, cout});
        kernels::temporal_conv(frames, joints, cin, cout, ksize, stride, vx.data.data(), vw.data.data(),
                               out.data.data());
        return record(std::move(out), {x, w}, [frames, joints, cin, cout, ksize, stride](Tape& t, Node& n) {
            const Tensor& vx = t.value(n.parents[0]);
            const Tensor& vw = t.value(n.parents[1]);
            Tensor& gx = t.ensure_grad(t.nodes_[n.parents[0]]);
            Tensor& gw = t.ensure_grad(t.nodes_[n.parents[1]]);
            Tensor wt = transpose_w(vw, ksize, cin, cout);
            kernels::temporal_conv_dx(frames, joints, cin, cout, ksize, stride, n.grad.data.data(), wt.data.data(),
                                      gx.data.data());
            kernels::temporal_conv_dw(frames, joints, cin, cout, ksize, stride, vx.data.data(), n.grad.data.data(),
                                      gw.data.data());
        });
    }

    // x {B*T,J,Cin} holding `batch` stacked views of T frames each; the kernel
    // never mixes frames across views. w {K,Cin,Cout}.
    int temporal_conv_batched(int x, int w, int stride, int batch) {
        const Tensor& vx = value(x);
        const Tensor& vw = value(w);
        if (vx.ndim() != 3 || vw.ndim() != 3 || vx.dim(2) != vw.dim(1) || batch <= 0 || vx.dim(0) % batch != 0)
            shape_error("temporal_conv_batched", vx.shape, vw.shape);
        int frames = vx.dim(0) / batch, joints = vx.dim(1), cin = vx.dim(2);
        int ksize = vw.dim(0), cout = vw.dim(2);
        int frames_out = (frames + stride - 1) / stride;
        Tensor out({batch * frames_out, joints, cout});
        for (int s = 0; s < batch; ++s)
            kernels::temporal_conv(frames, joints, cin, cout, ksize, stride,
                                   vx.data.data() + static_cast<size_t>(s) * frames * joints * cin, vw.data.data(),
                                   out.data.data() + static_cast<size_t>(s) * frames_out * joints * cout);
        return record(std::move(out), {x, w},
                      [frames, joints, cin, cout, ksize, stride, frames_out, batch](Tape& t, Node& n) {
                          const Tensor& vx = t.value(n.parents[0]);
                          const Tensor& vw = t.value(n.parents[1]);
                          Tensor& gx = t.ensure_grad(t.nodes_[n.parents[0]]);
                          Tensor& gw = t.ensure_grad(t.nodes_[n.parents[1]]);
                          Tensor wt = transpose_w(vw, ksize, cin, cout);
                          for (int s = 0; s < batch; ++s) {
                              size_t xoff = static_cast<size_t>(s) * frames * joints * cin;
                              size_t ooff = static_cast<size_t>(s) * frames_out * joints * cout;
                              kernels::temporal_conv_dx(frames, joints, cin, cout, ksize, stride,
                                                        n.grad.data.data() + ooff, wt.data.data(),
                                                        gx.data.data() + xoff);
                              kernels::temporal_conv_dw(frames, joints, cin, cout, ksize, stride,
                                                        vx.data.data() + xoff, n.grad.data.data() + ooff,
                                                        gw.data.data());
                          }
                      });
    }

    // ---- normalization / softmax family (2-D, row-wise) ----

    int softmax_rows(int a) {
        const Tensor& va = value(a);
        if (va.ndim() != 2) shape_error("softmax_rows", va.shape, {});
        int r = va.dim(0), c = va.dim(1);
        Tensor out({r, c});
        for (int i = 0; i < r; ++i) {
            T mx = va.at(i, 0);
            for (int j = 1; j < c; ++j) mx = std::max(mx, va.at(i, j));
            T z = 0;
            for (int j = 0; j < c; ++j) z += std::exp(va.at(i, j) - mx);
            for (int j = 0; j < c; ++j) out.at(i, j) = std::exp(va.at(i, j) - mx) / z;
        }
        return record(std::move(out), {a}, [r, c](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int i = 0; i < r; ++i) {
                T dot = 0;
                for (int j = 0; j < c; ++j) dot += n.grad.at(i, j) * n.value.at(i, j);
                for (int j = 0; j < c; ++j) ga.at(i, j) += n.value.at(i, j) * (n.grad.at(i, j) - dot);
            }
        });
    }

    int logsumexp_rows(int a) {
        const Tensor& va = value(a);
        if (va.ndim() != 2) shape_error("logsumexp_rows", va.shape, {});
        int r = va.dim(0), c = va.dim(1);
        Tensor out({r, 1});
        for (int i = 0; i < r; ++i) {
            T mx = va.at(i, 0);
            for (int j = 1; j < c; ++j) mx = std::max(mx, va.at(i, j));
            T z = 0;
            for (int j = 0; j < c; ++j) z += std::exp(va.at(i, j) - mx);
            out.at(i, 0) = mx + std::log(z);
        }
        return record(std::move(out), {a}, [r, c](Tape& t, Node& n) {
            const Tensor& va = t.value(n.parents[0]);
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) ga.at(i, j) += n.grad.at(i, 0) * std::exp(va.at(i, j) - n.value.at(i, 0));
        });
    }

    int l2_normalize_rows(int a) {
        const Tensor& va = value(a);
        if (va.ndim() != 2) shape_error("l2_normalize_rows", va.shape, {});
        int r = va.dim(0), c = va.dim(1);
        Tensor out({r, c});
        std::vector<T> norms(r);
        for (int i = 0; i < r; ++i) {
            T s = 0;
            for (int j = 0; j < c; ++j) s += va.at(i, j) * va.at(i, j);
            if (s == T(0)) throw std::runtime_error("l2_normalize_rows: zero vector at row " + std::to_string(i));
            norms[i] = std::sqrt(s);
            for (int j = 0; j < c; ++j) out.at(i, j) = va.at(i, j) / norms[i];
        }
        return record(std::move(out), {a}, [r, c, norms](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (int i = 0; i < r; ++i) {
                T dot = 0;
                for (int j = 0; j < c; ++j) dot += n.grad.at(i, j) * n.value.at(i, j);
                for (int j = 0; j < c; ++j) ga.at(i, j) += (n.grad.at(i, j) - dot * n.value.at(i, j)) / norms[i];
            }
        });
    }

    // pick one column per row: out[r,0] = a[r, cols[r]]
    int gather_cols(int a, std::vector<int> cols) {
        const Tensor& va = value(a);
        if (va.ndim() != 2 || static_cast<int>(cols.size()) != va.dim(0)) shape_error("gather_cols", va.shape, {});
        int r = va.dim(0);
        Tensor out({r, 1});
        for (int i = 0; i < r; ++i) out.at(i, 0) = va.at(i, cols[i]);
        return record(std::move(out), {a}, [cols](Tape& t, Node& n) {
            Tensor& ga = t.ensure_grad(t.nodes_[n.parents[0]]);
            for (size_t i = 0; i < cols.size(); ++i) ga.at(static_cast<int>(i), cols[i]) += n.grad.at(static_cast<int>(i), 0);
        });
    }

    // ---- backward ----

    void backward(int loss) {
        if (value(loss).numel() != 1) throw std::invalid_argument("backward: loss must be a scalar");
        TensorT<T> seed({1});
        seed.at(0) = T(1);
        backward_seeded(loss, seed);
    }

    void backward_seeded(int node, const TensorT<T>& seed) {
        Node& n = nodes_.at(node);
        if (!n.value.same_shape(seed)) throw std::invalid_argument("backward_seeded: seed shape mismatch");
        Tensor& g = ensure_grad(n);
        for (long i = 0; i < seed.numel(); ++i) g.at(i) += seed.at(i);
        for (int i = node; i >= 0; --i) {
            Node& cur = nodes_[i];
            if (cur.back && cur.grad.numel() > 0) cur.back(*this, cur);
        }
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated lazily
        std::vector<int> parents;
        bool needs_grad = true;
        std::function<void(Tape&, Node&)> back;
    };

    // {K,Cin,Cout} -> {K,Cout,Cin} for the conv input-grad kernel
    static Tensor transpose_w(const Tensor& w, int ksize, int cin, int cout) {
        Tensor wt({ksize, cout, cin});
        for (int kk = 0; kk < ksize; ++kk)
            for (int ci = 0; ci < cin; ++ci)
                for (int co = 0; co < cout; ++co)
                    wt.data[(static_cast<size_t>(kk) * cout + co) * cin + ci] =
                        w.data[(static_cast<size_t>(kk) * cin + ci) * cout + co];
        return wt;
    }

    Tensor& ensure_grad(Node& n) {
        if (n.grad.data.empty()) n.grad = Tensor(n.value.shape);
        return n.grad;
    }

    void accumulate(int id, const T* src) {
        Tensor& g = ensure_grad(nodes_[id]);
        for (long i = 0; i < g.numel(); ++i) g.at(i) += src[i];
    }

    int record(Tensor out, std::vector<int> parents, std::function<void(Tape&, Node&)> back) {
        nodes_.push_back(Node{std::move(out), {}, std::move(parents), true, std::move(back)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    void check_same(const char* op, int a, int b) const {
        if (!value(a).same_shape(value(b))) shape_error(op, value(a).shape, value(b).shape);
    }

    [[noreturn]] static void shape_error(const std::string& op, const std::vector<int>& a, const std::vector<int>& b) {
        throw std::invalid_argument(op + ": incompatible shapes " + Tensor::shape_str(a) + " and " +
                                    Tensor::shape_str(b));
    }

    std::vector<Node> nodes_;
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace skelrep
