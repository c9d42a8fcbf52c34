#include "themekit/matrix.hpp"

#include <cmath>

#include "themekit/errors.hpp"

namespace themekit {

double squared_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("vector dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    acc += d * d;
  }
  return acc;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  return std::sqrt(squared_distance(u, v));
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("vector dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm(std::span<const double> u) {
  return std::sqrt(dot(u, u));
}

}  // namespace themekit
