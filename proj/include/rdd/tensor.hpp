#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdd {

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense rank-3 array, channels x height x width, row-major doubles.
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w) {
        if (c < 1 || h < 1 || w < 1)
            throw ShapeError("Tensor dims must be >= 1, got (" + std::to_string(c) + "," +
                             std::to_string(h) + "," + std::to_string(w) + ")");
        data.assign(static_cast<size_t>(c) * h * w, fill);
    }

    size_t size() const { return data.size(); }

    double& at(int c, int i, int j) {
        return data[(static_cast<size_t>(c) * height + i) * width + j];
    }
    double at(int c, int i, int j) const {
        return data[(static_cast<size_t>(c) * height + i) * width + j];
    }

    bool same_dims(const Tensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

/// Dense rank-2 array, row-major doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c) {
        if (r < 0 || c < 0) throw ShapeError("Matrix dims must be non-negative");
        data.assign(static_cast<size_t>(r) * c, fill);
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
};

}  // namespace rdd
