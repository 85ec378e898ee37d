#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace skelrep {

// Dense row-major n-dimensional tensor. Float for training, double for
// gradient-check mode.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), T(0));
    }
    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != static_cast<size_t>(numel_of(shape)))
            throw std::invalid_argument("tensor: data length does not match shape");
    }

    static long numel_of(const std::vector<int>& s) {
        long n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
            n *= d;
        }
        return n;
    }

    long numel() const { return static_cast<long>(data.size()); }
    int dim(int i) const { return shape.at(i); }
    int ndim() const { return static_cast<int>(shape.size()); }

    T& at(long i) { return data[i]; }
    const T& at(long i) const { return data[i]; }

    // 2-D accessors
    T& at(int r, int c) { return data[static_cast<long>(r) * shape[1] + c]; }
    const T& at(int r, int c) const { return data[static_cast<long>(r) * shape[1] + c]; }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    template <class U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::ostringstream os;
        os << "(";
        for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
        os << ")";
        return os.str();
    }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace skelrep
