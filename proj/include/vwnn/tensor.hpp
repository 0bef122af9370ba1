#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vwnn/errors.hpp"

namespace vwnn {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

/// Dense row-major array of doubles with rank 1 to 3.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(extent_product(shape_), fill);
  }

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (extent_product(shape_) != data_.size()) {
      throw DimensionError("tensor of shape " + shape_str(shape_) + " cannot hold " +
                           std::to_string(data_.size()) + " elements");
    }
  }

  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> flat;
    flat.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix literal");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(flat));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t extent_product(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }
  static void check_shape(const Shape& s) {
    if (s.empty() || s.size() > 3) throw DimensionError("tensor rank must be 1..3, got " + shape_str(s));
    for (auto e : s) {
      if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(s));
    }
  }

  Shape shape_;
  std::vector<double> data_;
};

/// out[i] = sum_j m(i, j) * v[j]
inline Tensor matvec(const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || m.extent(1) != v.extent(0)) {
    throw DimensionError("matvec: cannot multiply " + shape_str(m.shape()) + " by " + shape_str(v.shape()));
  }
  const std::size_t rows = m.extent(0), cols = m.extent(1);
  Tensor out({rows});
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

/// Contracts the last axis of a rank-3 tensor with a vector:
/// out(a, b) = sum_m t(a, b, m) * p[m]
inline Tensor contract3(const Tensor& t, const Tensor& p) {
  if (t.rank() != 3 || p.rank() != 1 || t.extent(2) != p.extent(0)) {
    throw DimensionError("contract3: cannot contract " + shape_str(t.shape()) + " with " + shape_str(p.shape()));
  }
  const std::size_t a_n = t.extent(0), b_n = t.extent(1), m_n = t.extent(2);
  Tensor out({a_n, b_n});
  const double* src = t.flat().data();
  for (std::size_t ab = 0; ab < a_n * b_n; ++ab) {
    double acc = 0.0;
    const double* row = src + ab * m_n;
    for (std::size_t m = 0; m < m_n; ++m) acc += row[m] * p[m];
    out[ab] = acc;
  }
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace vwnn
