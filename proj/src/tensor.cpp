// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <regex>

#include "pic/error.hpp"

namespace pic {

std::string shape_to_string(const Shape& shape) {
    std::string out = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : m_shape(std::move(shape)), m_data(shape_numel(m_shape), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : m_shape(std::move(shape)), m_data(std::move(data)) {
    if (m_data.size() != shape_numel(m_shape))
        throw ValidationError("tensor data has " + std::to_string(m_data.size()) + " values, shape " +
                              shape_to_string(m_shape) + " needs " + std::to_string(shape_numel(m_shape)));
}

Tensor Tensor::reshaped(Shape shape) const {
    return Tensor(std::move(shape), m_data);
}

bool Tensor::all_finite() const {
    for (double v : m_data)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::norm() const {
    double acc = 0.0;
    for (double v : m_data) acc += v * v;
    return std::sqrt(acc);
}

double Tensor::sum() const {
    return std::accumulate(m_data.begin(), m_data.end(), 0.0);
}

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "tensor add");
    for (size_t i = 0; i < m_data.size(); ++i) m_data[i] += other.m_data[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    require_same_shape(*this, other, "tensor subtract");
    for (size_t i = 0; i < m_data.size(); ++i) m_data[i] -= other.m_data[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : m_data) v *= s;
    return *this;
}

void require_same_shape(const Tensor& a, const Tensor& b, const std::string& what) {
    if (a.shape() != b.shape())
        throw ValidationError(what + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                              shape_to_string(b.shape()));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    out += b;
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    out -= b;
    return out;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor out = a;
    out *= s;
    return out;
}

Tensor axpy(const Tensor& a, double s, const Tensor& b) {
    require_same_shape(a, b, "axpy");
    Tensor out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    return a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void save_npy(const std::filesystem::path& path, const Tensor& t) {
    static_assert(std::endian::native == std::endian::little, "npy writer assumes little-endian host");
    std::string shape = "(";
    for (size_t i = 0; i < t.shape().size(); ++i) shape += (i ? ", " : "") + std::to_string(t.shape()[i]);
    shape += t.shape().size() == 1 ? ",)" : ")";
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape + ", }";
    size_t total = 10 + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write("\x93NUMPY\x01\x00", 8);
    uint16_t len = static_cast<uint16_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw ValidationError("short write on " + path.string());
}

Tensor load_npy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0) throw ValidationError(path.string() + " is not an npy file");
    uint32_t header_len = 0;
    if (magic[6] == 1) {
        uint16_t l16 = 0;
        in.read(reinterpret_cast<char*>(&l16), 2);
        header_len = l16;
    } else {
        in.read(reinterpret_cast<char*>(&header_len), 4);
    }
    std::string header(header_len, '\0');
    in.read(header.data(), header_len);
    if (header.find("'<f8'") == std::string::npos || header.find("'fortran_order': False") == std::string::npos)
        throw ValidationError(path.string() + ": only C-order float64 npy is supported");

    std::smatch m;
    static const std::regex shape_re(R"('shape':\s*\(([^)]*)\))");
    if (!std::regex_search(header, m, shape_re)) throw ValidationError(path.string() + ": npy header has no shape");
    Shape shape;
    std::string dims = m[1];
    static const std::regex num_re(R"(\d+)");
    for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num_re); it != std::sregex_iterator(); ++it)
        shape.push_back(std::stoull(it->str()));

    std::vector<double> data(shape_numel(shape));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw ValidationError(path.string() + ": truncated npy payload");
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace pic
