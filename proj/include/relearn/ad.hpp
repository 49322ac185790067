#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "relearn/activations.hpp"
#include "relearn/matrix.hpp"

namespace relearn::ad {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape over Matrix-valued nodes. Rank-3 activation
// tensors ride as (steps*nodes) x feats matrices; the node-axis ops take the
// step count explicitly. One tape per forward pass; backward() runs the
// recorded adjoint closures in reverse order.
class Tape {
 public:
  Var leaf(Matrix value) {
    nodes_.push_back({std::move(value), {}});
    return {static_cast<int>(nodes_.size() - 1)};
  }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  count_t size() const { return nodes_.size(); }

  void backward(Var root) {
    auto& nodes = nodes_;
    for (auto& n : nodes) {
      n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    Matrix& g = nodes[root.id].grad;
    for (count_t i = 0; i < g.size(); ++i) g.data()[i] = 1.0;
    for (int i = root.id; i >= 0; --i) {
      if (nodes[i].vjp) nodes[i].vjp(*this);
    }
  }

  // ---- arithmetic ----

  Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Matrix out = value(a);
    out += value(b);
    return record(std::move(out), [a, b](Tape& t, int self) {
      t.accumulate(a, t.nodes_[self].grad);
      t.accumulate(b, t.nodes_[self].grad);
    });
  }

  Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Matrix out = value(a);
    out -= value(b);
    return record(std::move(out), [a, b](Tape& t, int self) {
      t.accumulate(a, t.nodes_[self].grad);
      Matrix neg = t.nodes_[self].grad;
      neg *= -1.0;
      t.accumulate(b, neg);
    });
  }

  Var scale(Var a, double s) {
    Matrix out = value(a);
    out *= s;
    return record(std::move(out), [a, s](Tape& t, int self) {
      Matrix g = t.nodes_[self].grad;
      g *= s;
      t.accumulate(a, g);
    });
  }

  Var matmul(Var a, Var b) {
    Matrix out = value(a) * value(b);
    return record(std::move(out), [a, b](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      t.accumulate(a, g * t.value(b).transposed());
      t.accumulate(b, t.value(a).transposed() * g);
    });
  }

  // a * b^T, for attention-style scores.
  Var matmul_bt(Var a, Var b) {
    Matrix out = value(a) * value(b).transposed();
    return record(std::move(out), [a, b](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      t.accumulate(a, g * t.value(b));
      t.accumulate(b, g.transposed() * t.value(a));
    });
  }

  // x*w + broadcast bias row; bias must be 1 x out.
  Var affine(Var x, Var w, Var b) {
    const Matrix& xv = value(x);
    const Matrix& wv = value(w);
    const Matrix& bv = value(b);
    if (xv.cols() != wv.rows()) throw ShapeMismatch("affine input width");
    if (bv.rows() != 1 || bv.cols() != wv.cols())
      throw ShapeMismatch("affine bias must be 1 x out");
    Matrix out = xv * wv;
    for (count_t i = 0; i < out.rows(); ++i)
      for (count_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
    return record(std::move(out), [x, w, b](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      t.accumulate(x, g * t.value(w).transposed());
      t.accumulate(w, t.value(x).transposed() * g);
      Matrix db(1, g.cols());
      for (count_t i = 0; i < g.rows(); ++i)
        for (count_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
      t.accumulate(b, db);
    });
  }

  // ---- elementwise ----

  Var gelu(Var a) {
    return elementwise(a, relearn::gelu, relearn::gelu_grad);
  }

  Var relu(Var a) {
    return elementwise(
        a, relearn::relu, +[](double v) { return v > 0.0 ? 1.0 : 0.0; });
  }

  Var tanh(Var a) {
    return elementwise(
        a, +[](double v) { return std::tanh(v); },
        +[](double v) {
          const double y = std::tanh(v);
          return 1.0 - y * y;
        });
  }

  Var sigmoid(Var a) {
    return elementwise(a, relearn::sigmoid, +[](double v) {
      const double y = relearn::sigmoid(v);
      return y * (1.0 - y);
    });
  }

  Var bounded_tanh(Var a) {
    return elementwise(a, relearn::bounded_tanh, +[](double v) {
      const double y = std::tanh(v);
      return 1.0 - y * y;
    });
  }

  Var bounded_sigmoid(Var a) {
    return elementwise(a, relearn::bounded_sigmoid, +[](double v) {
      const double y = relearn::sigmoid(v);
      return y * (1.0 - y);
    });
  }

  // ---- structured ----

  Var softmax_rows(Var a) {
    Matrix out = relearn::softmax_rows(value(a));
    return record(std::move(out), [a](Tape& t, int self) {
      const Matrix& y = t.nodes_[self].value;
      const Matrix& g = t.nodes_[self].grad;
      Matrix da(y.rows(), y.cols());
      for (count_t i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (count_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
        for (count_t j = 0; j < y.cols(); ++j)
          da(i, j) = y(i, j) * (g(i, j) - dot);
      }
      t.accumulate(a, da);
    });
  }

  // Literal "minus diag": diagonal logits become zero, still receiving
  // softmax mass e^0 downstream.
  Var zero_diagonal(Var a) {
    Matrix out = value(a);
    for (count_t i = 0; i < out.rows(); ++i) out(i, i) = 0.0;
    return record(std::move(out), [a](Tape& t, int self) {
      Matrix g = t.nodes_[self].grad;
      for (count_t i = 0; i < g.rows(); ++i) g(i, i) = 0.0;
      t.accumulate(a, g);
    });
  }

  // Alternative masking mode: diagonal logits pushed to -inf (numerically a
  // large negative), so the diagonal receives no softmax mass.
  Var mask_diagonal(Var a) {
    Matrix out = value(a);
    for (count_t i = 0; i < out.rows(); ++i) out(i, i) = -1e30;
    return record(std::move(out), [a](Tape& t, int self) {
      Matrix g = t.nodes_[self].grad;
      for (count_t i = 0; i < g.rows(); ++i) g(i, i) = 0.0;
      t.accumulate(a, g);
    });
  }

  // out[t] = k * z[t] for every step; z is (steps*n) x d, k is n x n.
  Var apply_node_matrix(Var k, Var z, count_t steps) {
    const Matrix& kv = value(k);
    const Matrix& zv = value(z);
    const count_t n = kv.rows();
    if (kv.cols() != n) throw ShapeMismatch("node operator must be square");
    if (zv.rows() != steps * n) throw ShapeMismatch("stacked tensor rows");
    const count_t d = zv.cols();
    Matrix out(zv.rows(), d);
    for (count_t t = 0; t < steps; ++t)
      for (count_t u = 0; u < n; ++u)
        for (count_t v = 0; v < n; ++v) {
          const double kuv = kv(u, v);
          if (kuv == 0.0) continue;
          for (count_t c = 0; c < d; ++c)
            out(t * n + u, c) += kuv * zv(t * n + v, c);
        }
    return record(std::move(out), [k, z, steps, n, d](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      const Matrix& kv = t.value(k);
      const Matrix& zv = t.value(z);
      Matrix dz(zv.rows(), d);
      Matrix dk(n, n);
      for (count_t s = 0; s < steps; ++s)
        for (count_t u = 0; u < n; ++u)
          for (count_t v = 0; v < n; ++v) {
            const double kuv = kv(u, v);
            double dot = 0.0;
            for (count_t c = 0; c < d; ++c) {
              const double gu = g(s * n + u, c);
              if (kuv != 0.0) dz(s * n + v, c) += kuv * gu;
              dot += gu * zv(s * n + v, c);
            }
            dk(u, v) += dot;
          }
      t.accumulate(z, dz);
      t.accumulate(k, dk);
    });
  }

  // Per-node gains: out row (t,u) = gains[u] * z row (t,u); gains is n x 1.
  Var scale_nodes(Var z, Var gains, count_t steps) {
    const Matrix& zv = value(z);
    const Matrix& gv = value(gains);
    const count_t n = gv.rows();
    if (gv.cols() != 1) throw ShapeMismatch("gains must be a column");
    if (zv.rows() != steps * n) throw ShapeMismatch("stacked tensor rows");
    Matrix out = zv;
    for (count_t t = 0; t < steps; ++t)
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < zv.cols(); ++c) out(t * n + u, c) *= gv(u, 0);
    return record(std::move(out), [z, gains, steps, n](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      const Matrix& zv = t.value(z);
      const Matrix& gv = t.value(gains);
      Matrix dz(zv.rows(), zv.cols());
      Matrix dg(n, 1);
      for (count_t s = 0; s < steps; ++s)
        for (count_t u = 0; u < n; ++u)
          for (count_t c = 0; c < zv.cols(); ++c) {
            dz(s * n + u, c) = gv(u, 0) * g(s * n + u, c);
            dg(u, 0) += g(s * n + u, c) * zv(s * n + u, c);
          }
      t.accumulate(z, dz);
      t.accumulate(gains, dg);
    });
  }

  Var mean_over_steps(Var z, count_t steps) {
    const Matrix& zv = value(z);
    if (zv.rows() % steps != 0) throw ShapeMismatch("stacked tensor rows");
    const count_t n = zv.rows() / steps;
    Matrix out(n, zv.cols());
    for (count_t t = 0; t < steps; ++t)
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < zv.cols(); ++c)
          out(u, c) += zv(t * n + u, c) / static_cast<double>(steps);
    return record(std::move(out), [z, steps, n](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      Matrix dz(steps * n, g.cols());
      for (count_t s = 0; s < steps; ++s)
        for (count_t u = 0; u < n; ++u)
          for (count_t c = 0; c < g.cols(); ++c)
            dz(s * n + u, c) = g(u, c) / static_cast<double>(steps);
      t.accumulate(z, dz);
    });
  }

  Var slice_step(Var z, count_t step, count_t steps) {
    const Matrix& zv = value(z);
    if (zv.rows() % steps != 0) throw ShapeMismatch("stacked tensor rows");
    const count_t n = zv.rows() / steps;
    if (step >= steps) throw ShapeMismatch("step out of range");
    Matrix out(n, zv.cols());
    for (count_t u = 0; u < n; ++u)
      for (count_t c = 0; c < zv.cols(); ++c) out(u, c) = zv(step * n + u, c);
    return record(std::move(out), [z, step, n](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      Matrix dz(t.value(z).rows(), g.cols());
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < g.cols(); ++c) dz(step * n + u, c) = g(u, c);
      t.accumulate(z, dz);
    });
  }

  Var stack_steps(const std::vector<Var>& step_vars) {
    if (step_vars.empty()) throw ShapeMismatch("stack of zero steps");
    const count_t n = value(step_vars[0]).rows();
    const count_t d = value(step_vars[0]).cols();
    Matrix out(step_vars.size() * n, d);
    for (count_t t = 0; t < step_vars.size(); ++t) {
      const Matrix& sv = value(step_vars[t]);
      if (sv.rows() != n || sv.cols() != d) throw ShapeMismatch("stack shapes");
      for (count_t u = 0; u < n; ++u)
        for (count_t c = 0; c < d; ++c) out(t * n + u, c) = sv(u, c);
    }
    auto vars = step_vars;
    return record(std::move(out), [vars, n](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      for (count_t s = 0; s < vars.size(); ++s) {
        Matrix ds(n, g.cols());
        for (count_t u = 0; u < n; ++u)
          for (count_t c = 0; c < g.cols(); ++c) ds(u, c) = g(s * n + u, c);
        t.accumulate(vars[s], ds);
      }
    });
  }

  Var concat_cols(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.rows() != bv.rows()) throw ShapeMismatch("concat row counts");
    Matrix out(av.rows(), av.cols() + bv.cols());
    for (count_t i = 0; i < av.rows(); ++i) {
      for (count_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
      for (count_t j = 0; j < bv.cols(); ++j) out(i, av.cols() + j) = bv(i, j);
    }
    const count_t ac = av.cols();
    return record(std::move(out), [a, b, ac](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      Matrix da(g.rows(), ac), db(g.rows(), g.cols() - ac);
      for (count_t i = 0; i < g.rows(); ++i) {
        for (count_t j = 0; j < ac; ++j) da(i, j) = g(i, j);
        for (count_t j = ac; j < g.cols(); ++j) db(i, j - ac) = g(i, j);
      }
      t.accumulate(a, da);
      t.accumulate(b, db);
    });
  }

  // Mean absolute error against a constant target; subgradient sign(d)/count
  // with sign(0) = 0.
  Var mae(Var pred, Matrix target) {
    const Matrix& pv = value(pred);
    if (!pv.same_shape(target)) throw ShapeMismatch("mae target shape");
    double sum = 0.0;
    for (count_t i = 0; i < pv.size(); ++i)
      sum += std::fabs(pv.data()[i] - target.data()[i]);
    Matrix out(1, 1);
    out(0, 0) = sum / static_cast<double>(pv.size());
    return record(std::move(out), [pred, target](Tape& t, int self) {
      const double g = t.nodes_[self].grad(0, 0);
      const Matrix& pv = t.value(pred);
      Matrix dp(pv.rows(), pv.cols());
      const double inv = g / static_cast<double>(pv.size());
      for (count_t i = 0; i < pv.size(); ++i) {
        const double d = pv.data()[i] - target.data()[i];
        dp.data()[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
      }
      t.accumulate(pred, dp);
    });
  }

 private:
  struct Node {
    Matrix value;
    std::function<void(Tape&)> vjp;
    Matrix grad;
  };

  Var record(Matrix value, std::function<void(Tape&, int)> vjp) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({std::move(value), [vjp, id](Tape& t) { vjp(t, id); }});
    return {id};
  }

  Var elementwise(Var a, double (*f)(double), double (*df)(double)) {
    Matrix out = map_elementwise(value(a), f);
    return record(std::move(out), [a, df](Tape& t, int self) {
      const Matrix& g = t.nodes_[self].grad;
      const Matrix& av = t.value(a);
      Matrix da(av.rows(), av.cols());
      for (count_t i = 0; i < av.size(); ++i)
        da.data()[i] = df(av.data()[i]) * g.data()[i];
      t.accumulate(a, da);
    });
  }

  void accumulate(Var v, const Matrix& g) { nodes_[v.id].grad += g; }

  void check_same_shape(Var a, Var b, const char* op) const {
    if (!value(a).same_shape(value(b)))
      throw ShapeMismatch(std::string("tape op ") + op);
  }

  std::vector<Node> nodes_;
};

}  // namespace relearn::ad
