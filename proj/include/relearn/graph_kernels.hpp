#pragma once

#include <cmath>
#include <utility>

#include "relearn/graph.hpp"

namespace relearn {

enum class KernelKind { predefined, diffusion, adaptive, data_driven };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::predefined: return "predefined";
    case KernelKind::diffusion: return "diffusion";
    case KernelKind::adaptive: return "adaptive";
    case KernelKind::data_driven: return "data-driven";
  }
  return "?";
}

// An N x N normalized propagation matrix plus its provenance.
struct GraphKernel {
  Matrix matrix;
  KernelKind kind = KernelKind::predefined;

  count_t nodes() const { return matrix.rows(); }
};

// Traffic-style predefined kernel: Gaussian distance weights gated by a
// distance threshold, then transition-normalized.
//   w(u,v) = exp(-d/sigma^2) where d < -sigma^2 * ln(eps), else 0.
// sigma is the standard deviation of the off-diagonal distances; including
// the zero diagonal would deflate it on large N. d = 0 passes the gate for
// any eps in (0,1), so the diagonal keeps weight exp(0) = 1 before
// normalization.
inline GraphKernel traffic_kernel(const Matrix& distances_m, double epsilon,
                                  std::optional<double> sigma_sq_override = {}) {
  const count_t n = distances_m.rows();
  if (distances_m.cols() != n) throw ShapeMismatch("distance matrix must be square");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must be in (0,1)");
  for (count_t i = 0; i < n; ++i) {
    if (distances_m(i, i) != 0.0) throw Error("distance diagonal must be zero");
    for (count_t j = 0; j < n; ++j) {
      if (distances_m(i, j) < 0.0) throw Error("distances must be nonnegative");
      if (std::fabs(distances_m(i, j) - distances_m(j, i)) > 1e-9)
        throw Error("distance matrix must be symmetric");
    }
  }
  double sigma_sq;
  if (sigma_sq_override) {
    sigma_sq = *sigma_sq_override;
  } else {
    double mean = 0.0;
    count_t m = 0;
    for (count_t i = 0; i < n; ++i)
      for (count_t j = 0; j < n; ++j)
        if (i != j) { mean += distances_m(i, j); ++m; }
    if (m == 0) throw Error("need at least two nodes");
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (count_t i = 0; i < n; ++i)
      for (count_t j = 0; j < n; ++j)
        if (i != j) {
          const double d = distances_m(i, j) - mean;
          var += d * d;
        }
    var /= static_cast<double>(m);
    sigma_sq = var;
  }
  if (sigma_sq <= 0.0) throw Error("distances are all equal; sigma is zero");
  const double cutoff = -sigma_sq * std::log(epsilon);

  Matrix a(n, n);
  count_t kept_off_diag = 0;
  for (count_t i = 0; i < n; ++i)
    for (count_t j = 0; j < n; ++j) {
      const double d = distances_m(i, j);
      if (d < cutoff) {
        a(i, j) = std::exp(-d / sigma_sq);
        if (i != j) ++kept_off_diag;
      }
    }
  if (kept_off_diag == 0)
    throw AllFiltered("epsilon " + std::to_string(epsilon) +
                      " removed every off-diagonal weight");
  return {detail::normalize_transition(a, IsolatedPolicy::self_loop),
          KernelKind::predefined};
}

namespace detail {

// Relative altitude of the ridge between u and v: sup over the segment of
// terrain height minus the higher endpoint. Evaluated on a 64-point midpoint
// grid, which is symmetric under u <-> v.
inline double relative_altitude_m(const GeoTable& geo, count_t u, count_t v) {
  constexpr count_t kSamples = 64;
  const auto& alt = *geo.altitude_m;
  const double base = std::max(alt[u], alt[v]);
  auto profile = [&](double lambda) {
    if (geo.terrain_profile) return geo.terrain_profile(u, v, lambda);
    return lambda * alt[u] + (1.0 - lambda) * alt[v];
  };
  double sup = -std::numeric_limits<double>::infinity();
  for (count_t k = 0; k < kSamples; ++k) {
    const double lambda = (static_cast<double>(k) + 0.5) / kSamples;
    sup = std::max(sup, profile(lambda));
  }
  return sup - base;
}

}  // namespace detail

// Atmosphere-style predefined kernel: binary gates on geodesic distance and
// relative ridge altitude, then symmetric normalization.
inline GraphKernel atmosphere_kernel(const GeoTable& geo, double eps_dist_m,
                                     double xi_alt_m) {
  geo.validate();
  if (!(eps_dist_m > 0.0) || !(xi_alt_m > 0.0))
    throw Error("eps_dist and xi_alt must be positive");
  if (!geo.altitude_m)
    throw MissingAltitude("altitude gate requested but geo table has no altitudes");
  const count_t n = geo.nodes();
  const Matrix d = geodesic_distances_m(geo);
  Matrix a(n, n);
  for (count_t u = 0; u < n; ++u)
    for (count_t v = 0; v < n; ++v) {
      if (d(u, v) >= eps_dist_m) continue;
      const double h = u == v ? 0.0 : detail::relative_altitude_m(geo, u, v);
      if (h < xi_alt_m) a(u, v) = 1.0;
    }
  return {detail::normalize_symmetric(a, IsolatedPolicy::self_loop),
          KernelKind::predefined};
}

// Diffusion kernel pair: forward A*D^-1 and backward A^T*D'^-1. Directed
// graphs may leave zero columns; those stay zero rather than erroring, so a
// one-way chain normalizes to a single transition entry.
inline std::pair<GraphKernel, GraphKernel> diffusion_kernel(const Matrix& adjacency) {
  const count_t n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeMismatch("adjacency must be square");
  double total = 0.0;
  for (double v : adjacency.data()) {
    if (v < 0.0) throw Error("adjacency weights must be nonnegative");
    total += v;
  }
  if (total == 0.0) throw DegenerateDegree("adjacency has no edges");
  GraphKernel fwd{detail::normalize_transition(adjacency, IsolatedPolicy::zero),
                  KernelKind::diffusion};
  GraphKernel bwd{detail::normalize_transition(adjacency.transposed(),
                                               IsolatedPolicy::zero),
                  KernelKind::diffusion};
  return {std::move(fwd), std::move(bwd)};
}

}  // namespace relearn
