#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relearn/matrix.hpp"

namespace relearn {

enum class NormMode { transition, symmetric };

// What to do with a zero-degree node during normalization:
//   error     - reject the graph
//   self_loop - substitute a unit self-loop (default; keeps N(A) stochastic)
//   zero      - leave the row/column zero (mass vanishes at that node)
enum class IsolatedPolicy { error, self_loop, zero };

class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(Matrix adjacency) : adj_(std::move(adjacency)) {
    if (adj_.rows() != adj_.cols()) throw ShapeMismatch("adjacency must be square");
    if (!adj_.all_finite()) throw Error("adjacency has non-finite entries");
    for (count_t i = 0; i < adj_.rows(); ++i) {
      if (adj_(i, i) != 0.0) throw Error("adjacency diagonal must be zero");
      for (count_t j = 0; j < adj_.cols(); ++j)
        if (adj_(i, j) < 0.0) throw Error("adjacency weights must be nonnegative");
    }
  }

  count_t nodes() const { return adj_.rows(); }
  const Matrix& adjacency() const { return adj_; }

 private:
  Matrix adj_;
};

namespace detail {

// Column-degree transition normalization A * D^-1 of an arbitrary
// nonnegative matrix. Zero columns are handled per policy.
inline Matrix normalize_transition(const Matrix& a, IsolatedPolicy policy) {
  const count_t n = a.rows();
  Matrix work = a;
  std::vector<double> deg(n, 0.0);
  for (count_t j = 0; j < n; ++j)
    for (count_t i = 0; i < n; ++i) deg[j] += work(i, j);
  for (count_t j = 0; j < n; ++j) {
    if (deg[j] > 0.0) continue;
    switch (policy) {
      case IsolatedPolicy::error:
        throw DegenerateDegree("node " + std::to_string(j) + " has zero degree");
      case IsolatedPolicy::self_loop:
        work(j, j) = 1.0;
        deg[j] = 1.0;
        break;
      case IsolatedPolicy::zero:
        deg[j] = 1.0;  // divides a zero column, keeping it zero
        break;
    }
  }
  Matrix out(n, n);
  for (count_t i = 0; i < n; ++i)
    for (count_t j = 0; j < n; ++j) out(i, j) = work(i, j) / deg[j];
  return out;
}

inline Matrix normalize_symmetric(const Matrix& a, IsolatedPolicy policy) {
  const count_t n = a.rows();
  Matrix work = a;
  std::vector<double> deg(n, 0.0);
  for (count_t i = 0; i < n; ++i)
    for (count_t j = 0; j < n; ++j) deg[i] += work(i, j);
  for (count_t i = 0; i < n; ++i) {
    if (deg[i] > 0.0) continue;
    switch (policy) {
      case IsolatedPolicy::error:
        throw DegenerateDegree("node " + std::to_string(i) + " has zero degree");
      case IsolatedPolicy::self_loop:
        work(i, i) = 1.0;
        deg[i] = 1.0;
        break;
      case IsolatedPolicy::zero:
        deg[i] = 1.0;
        break;
    }
  }
  Matrix out(n, n);
  for (count_t i = 0; i < n; ++i) {
    const double di = 1.0 / std::sqrt(deg[i]);
    for (count_t j = 0; j < n; ++j)
      out(i, j) = di * work(i, j) / std::sqrt(deg[j]);
  }
  return out;
}

}  // namespace detail

// N(A): transition mode A*D^-1, symmetric mode D^-1/2 * A * D^-1/2.
inline Matrix normalize(const WeightedGraph& g, NormMode mode,
                        IsolatedPolicy policy = IsolatedPolicy::self_loop) {
  return mode == NormMode::transition
             ? detail::normalize_transition(g.adjacency(), policy)
             : detail::normalize_symmetric(g.adjacency(), policy);
}

// A(A) = I_N - N(A).
inline Matrix laplacian_like(const WeightedGraph& g, NormMode mode,
                             IsolatedPolicy policy = IsolatedPolicy::self_loop) {
  Matrix n = normalize(g, mode, policy);
  Matrix out = Matrix::identity(g.nodes());
  out -= n;
  return out;
}

// Per-node coordinates plus optional terrain, for the atmosphere kernel.
// The profile sampler returns terrain height at fraction lambda of the way
// from node u to node v; when absent, altitudes are interpolated linearly.
struct GeoTable {
  std::vector<double> lon_deg;
  std::vector<double> lat_deg;
  std::optional<std::vector<double>> altitude_m;
  std::function<double(count_t u, count_t v, double lambda)> terrain_profile;

  count_t nodes() const { return lon_deg.size(); }

  void validate() const {
    if (lat_deg.size() != lon_deg.size()) throw Error("geo table length mismatch");
    for (count_t i = 0; i < nodes(); ++i) {
      if (lon_deg[i] < -180.0 || lon_deg[i] > 180.0 ||
          lat_deg[i] < -90.0 || lat_deg[i] > 90.0)
        throw Error("coordinate out of range at node " + std::to_string(i));
    }
    if (altitude_m) {
      if (altitude_m->size() != nodes()) throw Error("altitude length mismatch");
      for (double a : *altitude_m)
        if (!std::isfinite(a)) throw Error("non-finite altitude");
    }
  }
};

// Great-circle distance in meters on a spherical Earth.
inline double haversine_m(double lon1_deg, double lat1_deg, double lon2_deg,
                          double lat2_deg) {
  constexpr double kEarthRadiusM = 6'371'000.0;
  const double d2r = std::numbers::pi / 180.0;
  const double phi1 = lat1_deg * d2r, phi2 = lat2_deg * d2r;
  const double dphi = (lat2_deg - lat1_deg) * d2r;
  const double dlam = (lon2_deg - lon1_deg) * d2r;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) *
                       std::sin(dlam / 2) * std::sin(dlam / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

inline Matrix geodesic_distances_m(const GeoTable& geo) {
  const count_t n = geo.nodes();
  Matrix d(n, n);
  for (count_t u = 0; u < n; ++u)
    for (count_t v = u + 1; v < n; ++v) {
      const double m = haversine_m(geo.lon_deg[u], geo.lat_deg[u],
                                   geo.lon_deg[v], geo.lat_deg[v]);
      d(u, v) = m;
      d(v, u) = m;
    }
  return d;
}

// CSV ingestion: `src,dst,weight` with zero-based node ids. The node count is
// one past the largest id unless a larger count is forced.
inline WeightedGraph load_adjacency_csv(const std::string& path, count_t min_nodes = 0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty adjacency file " + path);
  struct Edge { count_t s, d; double w; };
  std::vector<Edge> edges;
  count_t max_id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string s, d, w;
    if (!std::getline(ss, s, ',') || !std::getline(ss, d, ',') || !std::getline(ss, w))
      throw IoError("bad adjacency row: " + line);
    Edge e{static_cast<count_t>(std::stoull(s)),
           static_cast<count_t>(std::stoull(d)), std::stod(w)};
    max_id = std::max({max_id, e.s, e.d});
    edges.push_back(e);
  }
  const count_t n = std::max(min_nodes, edges.empty() ? min_nodes : max_id + 1);
  Matrix adj(n, n);
  for (const auto& e : edges)
    if (e.s != e.d) adj(e.s, e.d) = e.w;
  return WeightedGraph(adj);
}

// CSV ingestion: `node,lon,lat[,alt]`.
inline GeoTable load_geo_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty geo file " + path);
  const bool has_alt = line.find("alt") != std::string::npos;
  struct Row { count_t id; double lon, lat, alt; };
  std::vector<Row> rows;
  count_t max_id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    Row r{};
    if (!std::getline(ss, tok, ',')) throw IoError("bad geo row: " + line);
    r.id = static_cast<count_t>(std::stoull(tok));
    if (!std::getline(ss, tok, ',')) throw IoError("bad geo row: " + line);
    r.lon = std::stod(tok);
    if (!std::getline(ss, tok, ',')) throw IoError("bad geo row: " + line);
    r.lat = std::stod(tok);
    if (has_alt) {
      if (!std::getline(ss, tok)) throw IoError("bad geo row: " + line);
      r.alt = std::stod(tok);
    }
    max_id = std::max(max_id, r.id);
    rows.push_back(r);
  }
  GeoTable geo;
  const count_t n = rows.empty() ? 0 : max_id + 1;
  geo.lon_deg.assign(n, 0.0);
  geo.lat_deg.assign(n, 0.0);
  if (has_alt) geo.altitude_m = std::vector<double>(n, 0.0);
  for (const auto& r : rows) {
    geo.lon_deg[r.id] = r.lon;
    geo.lat_deg[r.id] = r.lat;
    if (has_alt) (*geo.altitude_m)[r.id] = r.alt;
  }
  geo.validate();
  return geo;
}

}  // namespace relearn
