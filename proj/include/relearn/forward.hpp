#pragma once

#include <vector>

#include "relearn/gmrf.hpp"

namespace relearn {

// Per-future-step scalars of the closed-form predictor. With t' = T + t:
//   alpha_t = theta_{t'} / W_{t',t'}
//   gamma_t = alpha_t / (1 + alpha_t)            in (0,1)
//   beta_t  = -W_{t',1:T} / W_{t',t'}            length-T coefficient vector
struct ForwardCoefficients {
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<std::vector<double>> beta;

  count_t future_steps() const { return alpha.size(); }
};

inline ForwardCoefficients coefficients(const GmrfParams& p) {
  const count_t t_hist = p.history_steps(), t_fut = p.future_steps();
  ForwardCoefficients c;
  c.alpha.resize(t_fut);
  c.gamma.resize(t_fut);
  c.beta.assign(t_fut, std::vector<double>(t_hist, 0.0));
  for (count_t t = 0; t < t_fut; ++t) {
    const count_t tp = t_hist + t;
    const double wtt = p.w()(tp, tp);
    c.alpha[t] = p.theta()[tp] / wtt;
    c.gamma[t] = c.alpha[t] / (1.0 + c.alpha[t]);
    for (count_t s = 0; s < t_hist; ++s) c.beta[t][s] = -p.w()(tp, s) / wtt;
  }
  return c;
}

// Outcome of a truncated Neumann evaluation. `truncated` is warning-grade:
// the prediction is still returned along with how far the series got.
struct NeumannResult {
  SpatiotemporalTensor prediction;
  std::vector<count_t> terms_used;     // per future step
  std::vector<double> last_term_norm;  // max-abs of the final added term
  bool truncated = false;
};

// Prop-1 predictor: per future step, contract history by beta_t, then run
// the geometric smoothing series (1-gamma) * sum_k (gamma N(A))^k applied to
// the contracted slice. Powers are applied iteratively to the running term,
// never materializing N(A)^k.
inline NeumannResult predict_neumann(const GmrfParams& p,
                                     const SpatiotemporalTensor& x,
                                     double tol = 1e-10, count_t k_max = 64) {
  if (x.steps() != p.history_steps())
    throw ShapeMismatch("history tensor steps must equal T");
  if (x.nodes() != p.nodes()) throw ShapeMismatch("history tensor node count");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  if (k_max < 1) throw Error("k_max must be at least 1");

  const ForwardCoefficients c = coefficients(p);
  const count_t t_fut = p.future_steps();
  const Matrix& norm_adj = p.normalized_adjacency();

  NeumannResult res{SpatiotemporalTensor(t_fut, x.nodes(), x.feats()),
                    std::vector<count_t>(t_fut, 0),
                    std::vector<double>(t_fut, 0.0), false};
  for (count_t t = 0; t < t_fut; ++t) {
    const double gamma = c.gamma[t];
    Matrix term = tensor_contract_time(x, c.beta[t]);  // k = 0
    Matrix acc = term;
    count_t k = 0;
    double term_norm = term.max_abs();
    while (term_norm > tol && k < k_max) {
      term = norm_adj * term;
      term *= gamma;
      acc += term;
      term_norm = term.max_abs();
      ++k;
    }
    if (term_norm > tol) res.truncated = true;
    res.terms_used[t] = k;
    res.last_term_norm[t] = term_norm;
    acc *= (1.0 - gamma);
    res.prediction.set_step(t, acc);
  }
  return res;
}

enum class ExactVariant {
  per_step,  // condition each y_t on x alone, the form the series targets
  joint      // one block solve for all future steps at once
};

// Closed-form conditional mean by dense solve. The per-step variant solves
// (I + alpha_t A(A)) m = beta_t-contraction for each future step; the joint
// variant solves Gamma_yy M = -Gamma_yx V(x) over the whole future block.
// The two coincide exactly when W couples future steps only through their
// diagonal; otherwise the joint solve is a diagnostics companion.
inline SpatiotemporalTensor predict_exact(const GmrfParams& p,
                                          const SpatiotemporalTensor& x,
                                          ExactVariant variant = ExactVariant::per_step) {
  if (x.steps() != p.history_steps())
    throw ShapeMismatch("history tensor steps must equal T");
  if (x.nodes() != p.nodes()) throw ShapeMismatch("history tensor node count");
  const count_t t_fut = p.future_steps(), n = p.nodes(), f = x.feats();
  SpatiotemporalTensor out(t_fut, n, f);

  if (variant == ExactVariant::per_step) {
    const ForwardCoefficients c = coefficients(p);
    for (count_t t = 0; t < t_fut; ++t) {
      Matrix rhs = tensor_contract_time(x, c.beta[t]);
      Matrix op = p.laplacian();
      op *= c.alpha[t];
      op += Matrix::identity(n);
      out.set_step(t, solve_spd(op, rhs));
    }
    return out;
  }

  // Joint: E[y|x] = -Gamma_yy^-1 Gamma_yx V(x).
  const count_t t_hist = p.history_steps();
  const Matrix& lap = p.laplacian();
  Matrix gamma_yy(t_fut * n, t_fut * n);
  for (count_t s = 0; s < t_fut; ++s)
    for (count_t t = 0; t < t_fut; ++t) {
      const double w = p.w()(t_hist + s, t_hist + t);
      for (count_t u = 0; u < n; ++u) {
        if (w != 0.0) gamma_yy(s * n + u, t * n + u) += w;
        if (s == t)
          for (count_t v = 0; v < n; ++v)
            gamma_yy(s * n + u, t * n + v) += p.theta()[t_hist + s] * lap(u, v);
      }
    }
  // Gamma_yx V(x): block (t,s) of Gamma_yx is W[T+t, s] * I_N.
  Matrix rhs(t_fut * n, f);
  for (count_t t = 0; t < t_fut; ++t)
    for (count_t s = 0; s < t_hist; ++s) {
      const double w = p.w()(t_hist + t, s);
      if (w == 0.0) continue;
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < f; ++c) rhs(t * n + u, c) -= w * x(s, u, c);
    }
  const Matrix sol = solve_spd(gamma_yy, rhs);
  for (count_t t = 0; t < t_fut; ++t)
    for (count_t u = 0; u < n; ++u)
      for (count_t c = 0; c < f; ++c) out(t, u, c) = sol(t * n + u, c);
  return out;
}

}  // namespace relearn
