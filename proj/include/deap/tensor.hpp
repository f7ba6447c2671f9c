#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace deap {

// H x W x D tensor, row-major with the channel index fastest:
// flat index (i*w + j)*d + c. Flattening in storage order therefore walks
// rows, then columns, then channels ascending.
struct Tensor3 {
    int h = 0, w = 0, d = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int h_, int w_, int d_, double fill = 0.0)
        : h(h_), w(w_), d(d_), v(static_cast<std::size_t>(h_) * w_ * d_, fill) {
        if (h_ < 0 || w_ < 0 || d_ < 0)
            throw ContractError("Tensor3: negative dimension");
    }

    std::size_t size() const { return v.size(); }

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i) * w + j) * d + c;
    }

    double& at(int i, int j, int c) { return v[index(i, j, c)]; }
    double at(int i, int j, int c) const { return v[index(i, j, c)]; }

    bool same_shape(const Tensor3& o) const { return h == o.h && w == o.w && d == o.d; }

    std::string shape_str() const {
        return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(d);
    }
};

// R_h x R_w x D x K kernel stack, row-major with the kernel index fastest:
// flat index ((m*w + n)*d + c)*k + q.
struct Tensor4 {
    int h = 0, w = 0, d = 0, k = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(int h_, int w_, int d_, int k_, double fill = 0.0)
        : h(h_), w(w_), d(d_), k(k_),
          v(static_cast<std::size_t>(h_) * w_ * d_ * k_, fill) {
        if (h_ < 0 || w_ < 0 || d_ < 0 || k_ < 0)
            throw ContractError("Tensor4: negative dimension");
    }

    std::size_t size() const { return v.size(); }

    std::size_t index(int m, int n, int c, int q) const {
        return ((static_cast<std::size_t>(m) * w + n) * d + c) * k + q;
    }

    double& at(int m, int n, int c, int q) { return v[index(m, n, c, q)]; }
    double at(int m, int n, int c, int q) const { return v[index(m, n, c, q)]; }

    // Extract kernel q as an R_h x R_w x D tensor.
    Tensor3 kernel(int q) const {
        if (q < 0 || q >= k) throw ContractError("Tensor4::kernel: index out of range");
        Tensor3 out(h, w, d);
        for (int m = 0; m < h; ++m)
            for (int n = 0; n < w; ++n)
                for (int c = 0; c < d; ++c)
                    out.at(m, n, c) = at(m, n, c, q);
        return out;
    }

    std::string shape_str() const {
        return std::to_string(h) + "x" + std::to_string(w) + "x" +
               std::to_string(d) + "x" + std::to_string(k);
    }
};

// Dense rows x cols matrix, row-major.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw ContractError("Matrix: negative dimension");
    }

    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
};

}  // namespace deap
