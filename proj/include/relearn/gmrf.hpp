#pragma once

#include <vector>

#include "relearn/graph.hpp"
#include "relearn/matrix.hpp"
#include "relearn/rng.hpp"
#include "relearn/tensor.hpp"

namespace relearn {

// Parameters of the joint Gaussian over the stacked history+future window:
// temporal coupling W ((T+T_P) square, SPD), per-step spatial gains theta
// (positive), and the graph whose Laplacian-like operator couples nodes.
// Variables are mean zero; data is centered externally when needed.
class GmrfParams {
 public:
  GmrfParams(Matrix w, std::vector<double> theta, WeightedGraph graph,
             count_t history_steps, NormMode mode = NormMode::symmetric,
             IsolatedPolicy policy = IsolatedPolicy::self_loop)
      : w_(std::move(w)), theta_(std::move(theta)), graph_(std::move(graph)),
        history_steps_(history_steps), mode_(mode), policy_(policy) {
    if (w_.rows() != w_.cols()) throw ShapeMismatch("W must be square");
    if (theta_.size() != w_.rows()) throw ShapeMismatch("theta length must match W");
    if (history_steps_ == 0 || history_steps_ >= w_.rows())
      throw Error("history length must split the window into two nonempty parts");
    if (!w_.is_symmetric(1e-10))
      throw NotPositiveDefinite("W is not symmetric within 1e-10");
    cholesky(w_);  // W must be SPD
    for (double t : theta_)
      if (!(t > 0.0)) throw Error("theta must be entrywise positive");
    norm_adj_ = normalize(graph_, mode_, policy_);
    lap_ = Matrix::identity(graph_.nodes());
    lap_ -= norm_adj_;
  }

  const Matrix& w() const { return w_; }
  const std::vector<double>& theta() const { return theta_; }
  const WeightedGraph& graph() const { return graph_; }
  NormMode norm_mode() const { return mode_; }
  IsolatedPolicy isolated_policy() const { return policy_; }

  count_t total_steps() const { return w_.rows(); }
  count_t history_steps() const { return history_steps_; }
  count_t future_steps() const { return w_.rows() - history_steps_; }
  count_t nodes() const { return graph_.nodes(); }
  count_t variables() const { return total_steps() * nodes(); }

  // N(A) and A(A) = I - N(A), fixed at construction.
  const Matrix& normalized_adjacency() const { return norm_adj_; }
  const Matrix& laplacian() const { return lap_; }

  // Restriction to time steps 1..T plus the single future step t (0-based
  // future index). Principal submatrices of an SPD matrix stay SPD, so the
  // result is a valid parameter set describing the per-step conditioning
  // model of one future step given all of history.
  GmrfParams restrict_to_future_step(count_t t) const {
    const count_t tp = history_steps_ + t;
    if (tp >= total_steps()) throw Error("future step out of range");
    const count_t m = history_steps_ + 1;
    Matrix wr(m, m);
    std::vector<count_t> keep(history_steps_);
    for (count_t s = 0; s < history_steps_; ++s) keep[s] = s;
    keep.push_back(tp);
    for (count_t a = 0; a < m; ++a)
      for (count_t b = 0; b < m; ++b) wr(a, b) = w_(keep[a], keep[b]);
    std::vector<double> th(m);
    for (count_t a = 0; a < m; ++a) th[a] = theta_[keep[a]];
    return GmrfParams(wr, th, graph_, history_steps_, mode_, policy_);
  }

 private:
  Matrix w_;
  std::vector<double> theta_;
  WeightedGraph graph_;
  count_t history_steps_;
  NormMode mode_;
  IsolatedPolicy policy_;
  Matrix norm_adj_;
  Matrix lap_;
};

// Gamma = (W kron I_N) + diag(theta) kron A(A). Block (s,t) is
// W[s,t]*I_N + [s==t]*theta_s*A(A). Variables are flattened time-major:
// index = t*N + u.
inline Matrix assemble_gamma(const GmrfParams& p) {
  const count_t steps = p.total_steps(), n = p.nodes();
  const Matrix& lap = p.laplacian();
  Matrix gamma(steps * n, steps * n);
  for (count_t s = 0; s < steps; ++s) {
    for (count_t t = 0; t < steps; ++t) {
      const double w = p.w()(s, t);
      for (count_t u = 0; u < n; ++u) {
        if (w != 0.0) gamma(s * n + u, t * n + u) += w;
        if (s == t) {
          const double th = p.theta()[s];
          for (count_t v = 0; v < n; ++v)
            gamma(s * n + u, t * n + v) += th * lap(u, v);
        }
      }
    }
  }
  cholesky(gamma);  // rejects asymmetric or indefinite assemblies
  return gamma;
}

// Draws jointly Gaussian windows with precision Gamma, one independent draw
// per feature channel: solve L^T z = eps with eps standard normal, so
// cov(z) = (L L^T)^-1 = Gamma^-1.
inline std::vector<SpatiotemporalTensor> sample(const GmrfParams& p, RngState& rng,
                                                count_t draws, count_t feats = 1) {
  if (feats == 0) throw Error("need at least one feature channel");
  const count_t steps = p.total_steps(), n = p.nodes(), m = p.variables();
  const Matrix gamma = assemble_gamma(p);
  const Matrix l = cholesky(gamma);
  std::vector<SpatiotemporalTensor> out;
  out.reserve(draws);
  for (count_t d = 0; d < draws; ++d) {
    SpatiotemporalTensor tensor(steps, n, feats);
    Matrix eps(m, feats);
    for (count_t i = 0; i < m; ++i)
      for (count_t c = 0; c < feats; ++c) eps(i, c) = rng.normal();
    const Matrix z = solve_lower_transposed(l, eps);
    for (count_t t = 0; t < steps; ++t)
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < feats; ++c) tensor(t, u, c) = z(t * n + u, c);
    out.push_back(std::move(tensor));
  }
  return out;
}

namespace detail {

inline Matrix submatrix(const Matrix& m, const std::vector<count_t>& rows,
                        const std::vector<count_t>& cols) {
  Matrix out(rows.size(), cols.size());
  for (count_t i = 0; i < rows.size(); ++i)
    for (count_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

inline void check_index_sets(const GmrfParams& p,
                             const std::vector<count_t>& observed,
                             const std::vector<count_t>& query) {
  std::vector<bool> seen(p.variables(), false);
  for (count_t i : observed) {
    if (i >= p.variables()) throw Error("observed index out of range");
    if (seen[i]) throw IndexOverlap("duplicate observed index");
    seen[i] = true;
  }
  for (count_t i : query) {
    if (i >= p.variables()) throw Error("query index out of range");
    if (seen[i]) throw IndexOverlap("query index also observed");
    seen[i] = true;
  }
}

}  // namespace detail

// Exact conditional mean of the zero-mean GMRF: -Gamma_QQ^-1 Gamma_QO v_O.
// observed_values has one row per observed index, one column per feature
// channel. This is the ground-truth oracle behind both propositions.
inline Matrix conditional_mean_exact(const GmrfParams& p,
                                     const std::vector<count_t>& observed_indices,
                                     const Matrix& observed_values,
                                     const std::vector<count_t>& query_indices) {
  detail::check_index_sets(p, observed_indices, query_indices);
  if (observed_values.rows() != observed_indices.size())
    throw ShapeMismatch("observed value rows must match observed indices");
  const Matrix gamma = assemble_gamma(p);
  const Matrix gamma_qq = detail::submatrix(gamma, query_indices, query_indices);
  const Matrix gamma_qo = detail::submatrix(gamma, query_indices, observed_indices);
  Matrix rhs = gamma_qo * observed_values;
  rhs *= -1.0;
  return solve_spd(gamma_qq, rhs);
}

// Marginal covariance of the query block: (Gamma_QQ - Gamma_QO Gamma_OO^-1
// Gamma_OQ)^-1, the Schur-complement inverse.
inline Matrix marginal_covariance(const GmrfParams& p,
                                  const std::vector<count_t>& query_indices) {
  std::vector<bool> in_query(p.variables(), false);
  for (count_t i : query_indices) {
    if (i >= p.variables()) throw Error("query index out of range");
    if (in_query[i]) throw IndexOverlap("duplicate query index");
    in_query[i] = true;
  }
  std::vector<count_t> others;
  for (count_t i = 0; i < p.variables(); ++i)
    if (!in_query[i]) others.push_back(i);
  const Matrix gamma = assemble_gamma(p);
  Matrix schur = detail::submatrix(gamma, query_indices, query_indices);
  if (!others.empty()) {
    const Matrix gamma_qo = detail::submatrix(gamma, query_indices, others);
    const Matrix gamma_oo = detail::submatrix(gamma, others, others);
    const Matrix gamma_oq = detail::submatrix(gamma, others, query_indices);
    schur -= gamma_qo * solve_spd(gamma_oo, gamma_oq);
  }
  return inverse_spd(schur);
}

// Flat variable index of (time step, node).
inline count_t variable_index(const GmrfParams& p, count_t t, count_t u) {
  return t * p.nodes() + u;
}

}  // namespace relearn
