#pragma once

#include <vector>

#include "relearn/matrix.hpp"

namespace relearn {

// Dense rank-3 tensor, steps x nodes x feats, row-major. Carries windows (x,
// y), representations (Z_e, Z_h, ...) and predictions alike.
class SpatiotemporalTensor {
 public:
  SpatiotemporalTensor() = default;
  SpatiotemporalTensor(count_t steps, count_t nodes, count_t feats, double fill = 0.0)
      : steps_(steps), nodes_(nodes), feats_(feats),
        data_(steps * nodes * feats, fill) {}
  SpatiotemporalTensor(count_t steps, count_t nodes, count_t feats,
                       std::vector<double> data)
      : steps_(steps), nodes_(nodes), feats_(feats), data_(std::move(data)) {
    if (data_.size() != steps_ * nodes_ * feats_)
      throw ShapeMismatch("tensor data length does not match steps*nodes*feats");
  }

  count_t steps() const { return steps_; }
  count_t nodes() const { return nodes_; }
  count_t feats() const { return feats_; }
  count_t size() const { return data_.size(); }

  double& operator()(count_t t, count_t u, count_t c) {
    return data_[(t * nodes_ + u) * feats_ + c];
  }
  double operator()(count_t t, count_t u, count_t c) const {
    return data_[(t * nodes_ + u) * feats_ + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const SpatiotemporalTensor& o) const {
    return steps_ == o.steps_ && nodes_ == o.nodes_ && feats_ == o.feats_;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  // Nodes-by-feats slice at one time step.
  Matrix step_matrix(count_t t) const {
    Matrix m(nodes_, feats_);
    for (count_t u = 0; u < nodes_; ++u)
      for (count_t c = 0; c < feats_; ++c) m(u, c) = (*this)(t, u, c);
    return m;
  }

  void set_step(count_t t, const Matrix& m) {
    if (m.rows() != nodes_ || m.cols() != feats_)
      throw ShapeMismatch("set_step slice shape");
    for (count_t u = 0; u < nodes_; ++u)
      for (count_t c = 0; c < feats_; ++c) (*this)(t, u, c) = m(u, c);
  }

  friend SpatiotemporalTensor operator+(SpatiotemporalTensor a,
                                        const SpatiotemporalTensor& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("tensor +");
    for (count_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }
  friend SpatiotemporalTensor operator-(SpatiotemporalTensor a,
                                        const SpatiotemporalTensor& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("tensor -");
    for (count_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

 private:
  count_t steps_ = 0;
  count_t nodes_ = 0;
  count_t feats_ = 0;
  std::vector<double> data_;
};

// sum_t coeffs[t] * x[t,:,:] -> nodes x feats.
inline Matrix tensor_contract_time(const SpatiotemporalTensor& x,
                                   const std::vector<double>& coeffs) {
  if (coeffs.size() != x.steps())
    throw ShapeMismatch("contract_time coefficient length");
  Matrix out(x.nodes(), x.feats());
  for (count_t t = 0; t < x.steps(); ++t) {
    const double c = coeffs[t];
    if (c == 0.0) continue;
    for (count_t u = 0; u < x.nodes(); ++u)
      for (count_t f = 0; f < x.feats(); ++f) out(u, f) += c * x(t, u, f);
  }
  return out;
}

// Applies an N x N operator along the node axis, independently per time step
// and feature channel.
inline SpatiotemporalTensor tensor_apply_node_matrix(const Matrix& k,
                                                     const SpatiotemporalTensor& z) {
  if (k.rows() != z.nodes() || k.cols() != z.nodes())
    throw ShapeMismatch("node operator must be nodes x nodes");
  SpatiotemporalTensor out(z.steps(), z.nodes(), z.feats());
  for (count_t t = 0; t < z.steps(); ++t) {
    for (count_t u = 0; u < z.nodes(); ++u) {
      for (count_t v = 0; v < z.nodes(); ++v) {
        const double kuv = k(u, v);
        if (kuv == 0.0) continue;
        for (count_t c = 0; c < z.feats(); ++c)
          out(t, u, c) += kuv * z(t, v, c);
      }
    }
  }
  return out;
}

}  // namespace relearn
