#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sohip {

// Dense row-major matrix of doubles. Training state is 64-bit throughout;
// 32-bit floats appear only on the wire.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

struct Vector {
  std::vector<double> data;

  Vector() = default;
  explicit Vector(std::size_t n) : data(n, 0.0) {}
  Vector(std::initializer_list<double> init) : data(init) {}

  std::size_t dim() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
};

inline bool all_finite(const Vector& v) {
  for (double x : v.data)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const Matrix& m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

[[noreturn]] inline void throw_shape_error(const char* op, std::size_t got,
                                           std::size_t want) {
  std::ostringstream msg;
  msg << op << ": dimension mismatch, got " << got << ", expected " << want;
  throw std::invalid_argument(msg.str());
}

inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.dim() + b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.dim(); ++i) out[a.dim() + i] = b[i];
  return out;
}

inline Vector head(const Vector& v, std::size_t n) {
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i];
  return out;
}

inline Vector hadamard(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw_shape_error("hadamard", b.dim(), a.dim());
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline void add_inplace(Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw_shape_error("add_inplace", b.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) a[i] += b[i];
}

inline void add_inplace(Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw_shape_error("add_inplace", b.rows * b.cols, a.rows * a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline void scale_inplace(Vector& a, double s) {
  for (double& x : a.data) x *= s;
}

inline Vector axpy(double a, const Vector& x, const Vector& y) {
  if (x.dim() != y.dim()) throw_shape_error("axpy", y.dim(), x.dim());
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = a * x[i] + y[i];
  return out;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw_shape_error("max_abs_diff", b.dim(), a.dim());
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace sohip
