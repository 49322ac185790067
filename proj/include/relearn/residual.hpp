#pragma once

#include <algorithm>
#include <vector>

#include "relearn/forward.hpp"

namespace relearn {

// Residual of one future step with node u left out: predicted expectation
// minus observed label, rows ordered by node index skipping u.
struct ResidualTerm {
  count_t step = 0;
  count_t excluded_node = 0;
  Matrix values;  // (N-1) x f
};

// Paper shorthand for the per-node correction gain,
//   tau_{t,u} = [(1 + alpha_t)(1 + alpha_t A(A)_{u,u})]^-1 in (0,1].
// The correction itself is computed from the explicit kernel-row expansion,
// of which this scalar is a derived quantity.
inline double smoothing_coefficient(const GmrfParams& p, count_t t, count_t u) {
  const ForwardCoefficients c = coefficients(p);
  const double alpha = c.alpha[t];
  return 1.0 / ((1.0 + alpha) * (1.0 + alpha * p.laplacian()(u, u)));
}

// r_{t,u-hat} = E[y_t | x] (per-step closed form) minus observed labels,
// restricted to the nodes other than u.
inline ResidualTerm residual_term(const GmrfParams& p, const SpatiotemporalTensor& x,
                                  const SpatiotemporalTensor& y_observed,
                                  count_t t, count_t u) {
  const count_t n = p.nodes(), f = x.feats();
  if (t >= p.future_steps()) throw Error("future step out of range");
  if (u >= n) throw Error("node index out of range");
  if (y_observed.steps() != p.future_steps() || y_observed.nodes() != n ||
      y_observed.feats() != f)
    throw ShapeMismatch("observed labels must be T_P x N x f");
  const SpatiotemporalTensor base = predict_exact(p, x, ExactVariant::per_step);
  ResidualTerm r{t, u, Matrix(n - 1, f)};
  count_t row = 0;
  for (count_t v = 0; v < n; ++v) {
    if (v == u) continue;
    for (count_t c = 0; c < f; ++c)
      r.values(row, c) = base(t, v, c) - y_observed(t, v, c);
    ++row;
  }
  return r;
}

// Prop-2 single-node correction: base prediction for (t,u) plus the scaled
// kernel row against the residual of the other nodes,
//   (1 + alpha_t A(A)_{u,u})^-1 (I + alpha_t A(A))_{u,u-hat} x_2 r_{t,u-hat}.
// The scalar is the exact inverse of the 1x1 V1 block, equivalently the
// converged (1-gamma)-Neumann factor of the single-node partition.
inline std::vector<double> correct_node(const GmrfParams& p,
                                        const SpatiotemporalTensor& base,
                                        const ResidualTerm& residual,
                                        count_t t, count_t u) {
  const count_t n = p.nodes(), f = base.feats();
  if (residual.step != t || residual.excluded_node != u)
    throw Error("residual term does not match (t,u)");
  if (residual.values.rows() != n - 1 || residual.values.cols() != f)
    throw ShapeMismatch("residual must be (N-1) x f");
  const ForwardCoefficients c = coefficients(p);
  const double alpha = c.alpha[t];
  const Matrix& lap = p.laplacian();

  const double scale = 1.0 / (1.0 + alpha * lap(u, u));
  std::vector<double> out(f);
  for (count_t cfeat = 0; cfeat < f; ++cfeat) {
    double corr = 0.0;
    count_t col = 0;
    for (count_t v = 0; v < n; ++v) {
      if (v == u) continue;
      const double kernel_uv = alpha * lap(u, v);  // (I + alpha A)_{u,v}, u != v
      corr += kernel_uv * residual.values(col, cfeat);
      ++col;
    }
    out[cfeat] = base(t, u, cfeat) + scale * corr;
  }
  return out;
}

// General-partition correction from the proof: for disjoint V1, V2 covering
// all nodes, with observed labels on V2,
//   E[y_{t,V1} | x, y_{t,V2}] = base_{V1}
//     + (1-gamma_t) sum_k (gamma_t N(A)_{V1,V1})^k (I + alpha_t A(A))_{V1,V2}
//       x_2 r_{t,V2}.
// The Neumann loop runs over the V1-restricted submatrix.
inline Matrix correct_partition(const GmrfParams& p, const SpatiotemporalTensor& base,
                                const Matrix& y_observed_v2, count_t t,
                                const std::vector<count_t>& v1,
                                const std::vector<count_t>& v2,
                                double tol = 1e-12, count_t k_max = 512) {
  const count_t n = p.nodes(), f = base.feats();
  if (t >= p.future_steps()) throw Error("future step out of range");
  std::vector<int> membership(n, 0);
  for (count_t u : v1) {
    if (u >= n) throw PartitionInvalid("V1 index out of range");
    if (membership[u]) throw PartitionInvalid("duplicate node in V1");
    membership[u] = 1;
  }
  for (count_t u : v2) {
    if (u >= n) throw PartitionInvalid("V2 index out of range");
    if (membership[u]) throw PartitionInvalid("V1 and V2 overlap");
    membership[u] = 2;
  }
  if (v1.size() + v2.size() != n)
    throw PartitionInvalid("V1 and V2 must cover all nodes");
  if (y_observed_v2.rows() != v2.size() || (v2.size() && y_observed_v2.cols() != f))
    throw ShapeMismatch("observed V2 labels must be |V2| x f");

  Matrix out(v1.size(), f);
  for (count_t i = 0; i < v1.size(); ++i)
    for (count_t c = 0; c < f; ++c) out(i, c) = base(t, v1[i], c);
  if (v2.empty()) return out;

  const ForwardCoefficients fc = coefficients(p);
  const double alpha = fc.alpha[t], gamma = fc.gamma[t];
  const Matrix& lap = p.laplacian();
  const Matrix& norm_adj = p.normalized_adjacency();

  // r_{t,V2} = base_{V2} - y_{t,V2}
  Matrix r(v2.size(), f);
  for (count_t j = 0; j < v2.size(); ++j)
    for (count_t c = 0; c < f; ++c)
      r(j, c) = base(t, v2[j], c) - y_observed_v2(j, c);

  // (I + alpha A(A))_{V1,V2} x_2 r
  Matrix rhs(v1.size(), f);
  for (count_t i = 0; i < v1.size(); ++i)
    for (count_t j = 0; j < v2.size(); ++j) {
      const double k_ij = alpha * lap(v1[i], v2[j]);
      if (k_ij == 0.0) continue;
      for (count_t c = 0; c < f; ++c) rhs(i, c) += k_ij * r(j, c);
    }

  const Matrix n_sub = detail::submatrix(norm_adj, v1, v1);
  Matrix term = rhs;
  Matrix acc = rhs;
  for (count_t k = 0; k < k_max && term.max_abs() > tol; ++k) {
    term = n_sub * term;
    term *= gamma;
    acc += term;
  }
  acc *= (1.0 - gamma);
  out += acc;
  return out;
}

}  // namespace relearn
