#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdm::nn {

// Dense row-major value tensor. Doubles throughout: gradient checks need the
// precision and the networks here are small.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), fill);
    }

    static long numel_of(const std::vector<int>& s) {
        long n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
            n *= d;
        }
        return n;
    }

    long numel() const { return static_cast<long>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // [rows, cols]
    double& at2(int r, int c) { return data[static_cast<std::size_t>(r) * dim(1) + c]; }
    double at2(int r, int c) const { return data[static_cast<std::size_t>(r) * dim(1) + c]; }

    // [h, w, c]
    double& at3(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }
    double at3(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }

    // [kh, kw, cin, cout]
    double& at4(int a, int b, int c, int d) {
        return data[((static_cast<std::size_t>(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
    }
    double at4(int a, int b, int c, int d) const {
        return data[((static_cast<std::size_t>(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

    // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); the seeded init everywhere.
    static Tensor uniform_init(std::vector<int> shape, int fan_in, std::mt19937_64& rng) {
        Tensor t(std::move(shape));
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& v : t.data) v = u(rng);
        return t;
    }
};

inline std::string shape_str(const Tensor& t) {
    std::string s = "[";
    for (int i = 0; i < t.ndim(); ++i) {
        if (i) s += "x";
        s += std::to_string(t.dim(i));
    }
    return s + "]";
}

}  // namespace fdm::nn
