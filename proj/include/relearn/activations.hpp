#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "relearn/matrix.hpp"

namespace relearn {

// Exact-erf GELU: v * Phi(v). The tanh approximation is deliberately not
// used anywhere; gradient checks need one canonical definition.
inline double gelu(double v) {
  return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
}

// d/dv [v * Phi(v)] = Phi(v) + v * phi(v)
inline double gelu_grad(double v) {
  const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + v * pdf;
}

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Reparameterizations used by learnable kernel gains. std::tanh saturates to
// exactly 1.0 for |v| >~ 19, which would break the open-interval contract,
// hence the clamp one step inside the boundary.
inline double bounded_tanh(double v) {
  constexpr double lim = 1.0 - 1e-15;
  return std::clamp(std::tanh(v), -lim, lim);
}

inline double bounded_sigmoid(double v) {
  constexpr double hi = 1.0 - 1e-15;
  constexpr double lo = 1e-300;
  return std::clamp(sigmoid(v), lo, hi);
}

// Row-wise softmax; each output row is a probability simplex.
inline Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (count_t i = 0; i < m.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (count_t j = 0; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
    double sum = 0.0;
    for (count_t j = 0; j < m.cols(); ++j) {
      const double e = std::exp(m(i, j) - mx);
      out(i, j) = e;
      sum += e;
    }
    for (count_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
  }
  return out;
}

inline Matrix map_elementwise(const Matrix& m, double (*f)(double)) {
  Matrix out(m.rows(), m.cols());
  for (count_t i = 0; i < m.size(); ++i) out.data()[i] = f(m.data()[i]);
  return out;
}

}  // namespace relearn
