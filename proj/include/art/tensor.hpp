#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "art/errors.hpp"

namespace art {

// Dense row-major array of 64-bit floats. Rank is 1 (vectors) or 2
// (matrices) everywhere in this codebase; scalars are rank-1 of size 1.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel(shape), 0.0);
    }

    Tensor(std::vector<int> s, std::vector<double> values)
        : shape(std::move(s)), data(std::move(values)) {
        if (numel(shape) != data.size())
            throw ShapeError("Tensor: shape " + shape_str() + " does not match " +
                             std::to_string(data.size()) + " values");
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor vector(std::vector<double> v) {
        int n = static_cast<int>(v.size());
        return Tensor({n}, std::move(v));
    }

    static Tensor matrix(int rows, int cols, std::vector<double> v) {
        return Tensor({rows, cols}, std::move(v));
    }

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

    static std::size_t numel(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("Tensor: non-positive dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

}  // namespace art
