#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace themekit {

// Dense row-major matrix of doubles. Vectors are stored as 32-bit floats on
// disk but all in-memory math runs in 64-bit.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) {
    return {data.data() + i * cols, cols};
  }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  bool empty() const { return rows == 0; }

  bool operator==(const Matrix&) const = default;
};

double squared_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);
double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

}  // namespace themekit
