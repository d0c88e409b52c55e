// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace pic {

using Shape = std::vector<size_t>;

std::string shape_to_string(const Shape& shape);
size_t shape_numel(const Shape& shape);

/// Dense row-major tensor of doubles. Latents, noise predictions, attention maps
/// and embeddings all live in this one type.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return m_shape; }
    size_t size() const { return m_data.size(); }
    bool empty() const { return m_data.empty(); }

    double* data() { return m_data.data(); }
    const double* data() const { return m_data.data(); }
    std::vector<double>& values() { return m_data; }
    const std::vector<double>& values() const { return m_data; }

    double& operator[](size_t i) { return m_data[i]; }
    double operator[](size_t i) const { return m_data[i]; }

    /// Row access for 2-D tensors.
    double& at(size_t r, size_t c) { return m_data[r * m_shape[1] + c]; }
    double at(size_t r, size_t c) const { return m_data[r * m_shape[1] + c]; }

    Tensor reshaped(Shape shape) const;

    bool all_finite() const;
    double norm() const;
    double sum() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double s);

    bool operator==(const Tensor& other) const = default;

private:
    Shape m_shape;
    std::vector<double> m_data;
};

/// Throws ValidationError naming `what` when the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const std::string& what);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

/// a + s * b
Tensor axpy(const Tensor& a, double s, const Tensor& b);

/// Largest |a_i - b_i|.
double max_abs_diff(const Tensor& a, const Tensor& b);
bool bitwise_equal(const Tensor& a, const Tensor& b);

/// NumPy .npy (format 1.0, little-endian float64, C order).
void save_npy(const std::filesystem::path& path, const Tensor& t);
Tensor load_npy(const std::filesystem::path& path);

}  // namespace pic
