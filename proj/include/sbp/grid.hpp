#pragma once

// Uniform rectangular grids over axis-aligned boxes, nodal scalar fields,
// boundary data, quadrature and the norms used throughout the library.
//
// Node indexing. A grid in d dimensions (d in {1,2,3}) has n[a] interior
// nodes per axis a and two boundary layers, so the full lattice has
// n[a]+2 nodes per axis. Interior nodes are enumerated lexicographically
// with axis 0 fastest:
//     interior_index(i0,i1,i2) = i0 + n0*(i1 + n1*i2),   0 <= ia < na.
// Full-lattice nodes use the same rule with extents na+2 and indices in
// [0, na+1]; interior node (i0,i1,i2) sits at full node (i0+1,i1+1,i2+1).
// Boundary nodes (any full coordinate equal to 0 or na+1) are numbered by
// scanning the full lattice in lexicographic order and skipping interior
// nodes. These three enumerations define the node order of every on-disk
// field file.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbp {

using index_t = std::int64_t;

enum class NodeSet { interior, full, boundary };
enum class NormKind { L2, H01, HOmega, Linf };

namespace detail {
struct BoundaryTables {
  std::vector<index_t> full_to_boundary;  // -1 for interior full nodes
  std::vector<index_t> boundary_to_full;
};
}  // namespace detail

class GridDomain {
 public:
  GridDomain() = default;

  int dim() const { return dim_; }
  int n(int axis) const { return n_[axis]; }
  double length(int axis) const { return len_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  const std::array<int, 3>& n_per_axis() const { return n_; }

  index_t interior_count() const { return interior_count_; }
  index_t full_count() const { return full_count_; }
  index_t boundary_count() const { return boundary_count_; }

  index_t interior_index(int i0, int i1 = 0, int i2 = 0) const {
    return i0 + static_cast<index_t>(n_[0]) * (i1 + static_cast<index_t>(n_[1]) * i2);
  }
  // Full-lattice extents are n+2 on used axes and 1 on unused ones; unused
  // coordinates must be 0.
  index_t full_index(int j0, int j1 = 0, int j2 = 0) const {
    return j0 + static_cast<index_t>(fe_[0]) * (j1 + static_cast<index_t>(fe_[1]) * j2);
  }
  // Full-lattice index of an interior node.
  index_t interior_to_full(index_t idx) const {
    const auto m = interior_multi(idx);
    return full_index(m[0] + 1, dim_ > 1 ? m[1] + 1 : 0, dim_ > 2 ? m[2] + 1 : 0);
  }
  std::array<int, 3> interior_multi(index_t idx) const {
    std::array<int, 3> m{0, 0, 0};
    m[0] = static_cast<int>(idx % n_[0]);
    idx /= n_[0];
    m[1] = static_cast<int>(idx % n_[1]);
    m[2] = static_cast<int>(idx / n_[1]);
    return m;
  }
  std::array<int, 3> full_multi(index_t fidx) const {
    std::array<int, 3> m{0, 0, 0};
    m[0] = static_cast<int>(fidx % fe_[0]);
    fidx /= fe_[0];
    m[1] = static_cast<int>(fidx % fe_[1]);
    m[2] = static_cast<int>(fidx / fe_[1]);
    return m;
  }

  index_t boundary_index_of_full(index_t fidx) const { return tables_->full_to_boundary[fidx]; }
  index_t boundary_to_full(index_t bidx) const { return tables_->boundary_to_full[bidx]; }

  std::array<double, 3> interior_coords(index_t idx) const {
    const auto m = interior_multi(idx);
    return {(m[0] + 1) * h_[0], dim_ > 1 ? (m[1] + 1) * h_[1] : 0.0,
            dim_ > 2 ? (m[2] + 1) * h_[2] : 0.0};
  }
  std::array<double, 3> full_coords(index_t fidx) const {
    const auto m = full_multi(fidx);
    return {m[0] * h_[0], dim_ > 1 ? m[1] * h_[1] : 0.0, dim_ > 2 ? m[2] * h_[2] : 0.0};
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= h_[a];
    return v;
  }

  bool operator==(const GridDomain& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && len_ == o.len_;
  }
  bool operator!=(const GridDomain& o) const { return !(*this == o); }

  friend GridDomain build_grid(int dim, const std::vector<int>& n_per_axis,
                               const std::vector<double>& lengths);

 private:
  int dim_ = 0;
  std::array<int, 3> n_{1, 1, 1};
  std::array<int, 3> fe_{1, 1, 1};  // full-lattice extents
  std::array<double, 3> len_{1.0, 1.0, 1.0};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  index_t interior_count_ = 0, full_count_ = 0, boundary_count_ = 0;
  std::shared_ptr<const detail::BoundaryTables> tables_;
};

inline GridDomain build_grid(int dim, const std::vector<int>& n_per_axis,
                             const std::vector<double>& lengths) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("build_grid: dim must be 1, 2 or 3");
  if (static_cast<int>(n_per_axis.size()) != dim || static_cast<int>(lengths.size()) != dim)
    throw std::invalid_argument("build_grid: n_per_axis/lengths must have dim entries");
  GridDomain g;
  g.dim_ = dim;
  for (int a = 0; a < dim; ++a) {
    if (n_per_axis[a] < 3)
      throw std::invalid_argument("build_grid: n_per_axis must be >= 3 (axis " +
                                  std::to_string(a) + ")");
    if (!(lengths[a] > 0.0))
      throw std::invalid_argument("build_grid: lengths must be positive (axis " +
                                  std::to_string(a) + ")");
    g.n_[a] = n_per_axis[a];
    g.fe_[a] = n_per_axis[a] + 2;
    g.len_[a] = lengths[a];
    g.h_[a] = lengths[a] / (n_per_axis[a] + 1);
  }
  g.interior_count_ = 1;
  g.full_count_ = 1;
  for (int a = 0; a < dim; ++a) {
    g.interior_count_ *= g.n_[a];
    g.full_count_ *= g.n_[a] + 2;
  }
  g.boundary_count_ = g.full_count_ - g.interior_count_;

  auto tables = std::make_shared<detail::BoundaryTables>();
  tables->full_to_boundary.assign(g.full_count_, -1);
  tables->boundary_to_full.reserve(g.boundary_count_);
  const int e0 = g.n_[0] + 2;
  const int e1 = g.dim_ > 1 ? g.n_[1] + 2 : 1;
  const int e2 = g.dim_ > 2 ? g.n_[2] + 2 : 1;
  index_t f = 0;
  for (int j2 = 0; j2 < e2; ++j2)
    for (int j1 = 0; j1 < e1; ++j1)
      for (int j0 = 0; j0 < e0; ++j0, ++f) {
        const bool bdry = j0 == 0 || j0 == e0 - 1 ||
                          (g.dim_ > 1 && (j1 == 0 || j1 == e1 - 1)) ||
                          (g.dim_ > 2 && (j2 == 0 || j2 == e2 - 1));
        if (bdry) {
          tables->full_to_boundary[f] = static_cast<index_t>(tables->boundary_to_full.size());
          tables->boundary_to_full.push_back(f);
        }
      }
  g.tables_ = std::move(tables);
  return g;
}

// Nodal values of a scalar function. Interior fields carry a homogeneous
// (zero) trace by construction; full fields store boundary values in-line.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridDomain grid, NodeSet set, double fill = 0.0)
      : grid_(std::move(grid)), set_(set), v_(count_for(grid_, set), fill) {}
  ScalarField(GridDomain grid, NodeSet set, std::vector<double> values)
      : grid_(std::move(grid)), set_(set), v_(std::move(values)) {
    if (static_cast<index_t>(v_.size()) != count_for(grid_, set_))
      throw std::invalid_argument("ScalarField: value count does not match node set");
  }

  const GridDomain& grid() const { return grid_; }
  NodeSet node_set() const { return set_; }
  index_t size() const { return static_cast<index_t>(v_.size()); }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double operator[](index_t i) const { return v_[i]; }
  double& operator[](index_t i) { return v_[i]; }

  static index_t count_for(const GridDomain& g, NodeSet s) {
    switch (s) {
      case NodeSet::interior: return g.interior_count();
      case NodeSet::full: return g.full_count();
      case NodeSet::boundary: return g.boundary_count();
    }
    return 0;
  }

 private:
  GridDomain grid_;
  NodeSet set_ = NodeSet::interior;
  std::vector<double> v_;
};

class BoundaryData {
 public:
  BoundaryData() = default;
  explicit BoundaryData(GridDomain grid, double constant = 0.0)
      : grid_(std::move(grid)), v_(grid_.boundary_count(), constant) {}
  BoundaryData(GridDomain grid, std::vector<double> values)
      : grid_(std::move(grid)), v_(std::move(values)) {
    if (static_cast<index_t>(v_.size()) != grid_.boundary_count())
      throw std::invalid_argument("BoundaryData: value count does not match boundary");
  }

  const GridDomain& grid() const { return grid_; }
  index_t size() const { return static_cast<index_t>(v_.size()); }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double operator[](index_t i) const { return v_[i]; }
  double& operator[](index_t i) { return v_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  bool is_zero() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; });
  }

 private:
  GridDomain grid_;
  std::vector<double> v_;
};

inline void require_same_grid(const GridDomain& a, const GridDomain& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

// ---- field construction helpers ----

template <typename Fn>
ScalarField interior_field(const GridDomain& g, Fn&& f) {
  ScalarField out(g, NodeSet::interior);
  for (index_t i = 0; i < g.interior_count(); ++i) {
    const auto x = g.interior_coords(i);
    out[i] = f(x[0], x[1], x[2]);
  }
  return out;
}

template <typename Fn>
BoundaryData boundary_data(const GridDomain& g, Fn&& f) {
  BoundaryData out(g);
  for (index_t b = 0; b < g.boundary_count(); ++b) {
    const auto x = g.full_coords(g.boundary_to_full(b));
    out[b] = f(x[0], x[1], x[2]);
  }
  return out;
}

// Embed an interior field into the full lattice with the given trace.
inline ScalarField with_boundary(const ScalarField& interior, const BoundaryData& bc) {
  if (interior.node_set() != NodeSet::interior)
    throw std::invalid_argument("with_boundary: expects an interior field");
  require_same_grid(interior.grid(), bc.grid(), "with_boundary");
  const GridDomain& g = interior.grid();
  ScalarField out(g, NodeSet::full);
  for (index_t b = 0; b < g.boundary_count(); ++b) out[g.boundary_to_full(b)] = bc[b];
  for (index_t i = 0; i < g.interior_count(); ++i) out[g.interior_to_full(i)] = interior[i];
  return out;
}

inline ScalarField interior_part(const ScalarField& full) {
  if (full.node_set() != NodeSet::full)
    throw std::invalid_argument("interior_part: expects a full-lattice field");
  const GridDomain& g = full.grid();
  ScalarField out(g, NodeSet::interior);
  for (index_t i = 0; i < g.interior_count(); ++i) out[i] = full[g.interior_to_full(i)];
  return out;
}

inline BoundaryData boundary_part(const ScalarField& full) {
  if (full.node_set() != NodeSet::full)
    throw std::invalid_argument("boundary_part: expects a full-lattice field");
  const GridDomain& g = full.grid();
  BoundaryData out(g);
  for (index_t b = 0; b < g.boundary_count(); ++b) out[b] = full[g.boundary_to_full(b)];
  return out;
}

// Interior values of a field that may be stored on either node set.
inline double interior_value(const ScalarField& f, index_t interior_idx) {
  if (f.node_set() == NodeSet::interior) return f[interior_idx];
  return f[f.grid().interior_to_full(interior_idx)];
}

// ---- arithmetic (same node set, same grid) ----

inline void check_compatible(const ScalarField& a, const ScalarField& b, const char* where) {
  require_same_grid(a.grid(), b.grid(), where);
  if (a.node_set() != b.node_set())
    throw std::invalid_argument(std::string(where) + ": node-set mismatch");
}

inline ScalarField scaled(const ScalarField& a, double t) {
  ScalarField out = a;
  for (double& x : out.values()) x *= t;
  return out;
}

inline void axpy(double alpha, const ScalarField& x, ScalarField& y) {
  check_compatible(x, y, "axpy");
  for (index_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline ScalarField added(const ScalarField& a, const ScalarField& b) {
  check_compatible(a, b, "added");
  ScalarField out = a;
  for (index_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline ScalarField subtracted(const ScalarField& a, const ScalarField& b) {
  check_compatible(a, b, "subtracted");
  ScalarField out = a;
  for (index_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

// ---- quadrature and norms ----

// Nodal quadrature: uniform weight h^d per interior node (second order).
inline double integrate(const ScalarField& f) {
  if (f.node_set() == NodeSet::boundary)
    throw std::invalid_argument("integrate: boundary-only fields have no volume integral");
  const GridDomain& g = f.grid();
  double s = 0.0;
  if (f.node_set() == NodeSet::interior) {
    for (index_t i = 0; i < g.interior_count(); ++i) s += f[i];
  } else {
    for (index_t i = 0; i < g.interior_count(); ++i) s += f[g.interior_to_full(i)];
  }
  return s * g.cell_volume();
}

// Quadrature-weighted L2 inner product over interior nodes.
inline double dot_l2(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "dot_l2");
  const GridDomain& g = a.grid();
  double s = 0.0;
  for (index_t i = 0; i < g.interior_count(); ++i) s += interior_value(a, i) * interior_value(b, i);
  return s * g.cell_volume();
}

namespace detail {

// Directed-edge sum of the squared difference quotients; algebraically equal
// to <(-Delta_h)u, u> for homogeneous-trace u, but nonnegative term by term.
inline double dirichlet_form(const ScalarField& u) {
  const GridDomain& g = u.grid();
  const int d = g.dim();
  double total = 0.0;
  for (int a = 0; a < d; ++a) {
    const double w = 1.0 / (g.spacing(a) * g.spacing(a));
    const int na = g.n(a);
    index_t stride = 1;
    for (int b = 0; b < a; ++b) stride *= g.n(b);
    double s = 0.0;
    for (index_t i = 0; i < g.interior_count(); ++i) {
      const auto m = g.interior_multi(i);
      const double ui = u[i];
      const double left = m[a] > 0 ? u[i - stride] : 0.0;
      const double diff = ui - left;
      s += diff * diff;
      if (m[a] == na - 1) s += ui * ui;  // edge to the high boundary node
    }
    total += w * s;
  }
  return total * g.cell_volume();
}

// 2d+1-point stencil of (-Delta) (+ identity for Helmholtz) on interior
// nodes; neighbor values outside the interior come from `bc`.
template <typename BcFn>
void apply_second_order_stencil(const GridDomain& g, const std::vector<double>& u,
                                bool add_identity, BcFn&& bc, std::vector<double>& out) {
  const int d = g.dim();
  const index_t n_int = g.interior_count();
  out.assign(n_int, 0.0);
  std::array<double, 3> w{};
  std::array<index_t, 3> stride{};
  index_t s = 1;
  for (int a = 0; a < d; ++a) {
    w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    stride[a] = s;
    s *= g.n(a);
  }
  for (index_t i = 0; i < n_int; ++i) {
    const auto m = g.interior_multi(i);
    double acc = add_identity ? u[i] : 0.0;
    for (int a = 0; a < d; ++a) {
      const double left = m[a] > 0 ? u[i - stride[a]] : bc(i, a, -1);
      const double right = m[a] < g.n(a) - 1 ? u[i + stride[a]] : bc(i, a, +1);
      acc += w[a] * (2.0 * u[i] - left - right);
    }
    out[i] = acc;
  }
}

// Boundary accessor for the stencil: full-lattice neighbor of interior node
// `i` one step along axis `a` in direction `dir`.
inline index_t boundary_neighbor_full_index(const GridDomain& g, index_t i, int a, int dir) {
  const auto m = g.interior_multi(i);
  const int d = g.dim();
  std::array<int, 3> j{m[0] + 1, d > 1 ? m[1] + 1 : 0, d > 2 ? m[2] + 1 : 0};
  j[a] += dir;
  return g.full_index(j[0], j[1], j[2]);
}

}  // namespace detail

inline double norm(const ScalarField& f, NormKind kind) {
  const GridDomain& g = f.grid();
  switch (kind) {
    case NormKind::Linf: {
      double m = 0.0;
      for (double x : f.values()) m = std::max(m, std::abs(x));
      return m;
    }
    case NormKind::L2:
      return std::sqrt(dot_l2(f, f));
    case NormKind::H01:
    case NormKind::HOmega: {
      if (f.node_set() != NodeSet::interior)
        throw std::invalid_argument("norm: H01/HOmega require a homogeneous-trace field");
      if (kind == NormKind::H01) return std::sqrt(detail::dirichlet_form(f));
      std::vector<double> img;
      detail::apply_second_order_stencil(
          g, f.values(), false, [](index_t, int, int) { return 0.0; }, img);
      double s = 0.0;
      for (double x : img) s += x * x;
      return std::sqrt(s * g.cell_volume());
    }
  }
  return 0.0;
}

// d-linear interpolation of a field onto another grid over the same box.
// Homogeneous-trace fields are extended by their zero trace first, so the
// result is valid anywhere in the closed box.
inline ScalarField prolongate(const ScalarField& coarse, const GridDomain& fine) {
  const GridDomain& gc = coarse.grid();
  if (gc.dim() != fine.dim())
    throw std::invalid_argument("prolongate: dimension mismatch");
  for (int a = 0; a < gc.dim(); ++a)
    if (std::abs(gc.length(a) - fine.length(a)) > 1e-12 * gc.length(a))
      throw std::invalid_argument("prolongate: box mismatch");
  ScalarField src = coarse.node_set() == NodeSet::full
                        ? coarse
                        : with_boundary(coarse, BoundaryData(gc));
  const int d = gc.dim();
  ScalarField out(fine, coarse.node_set() == NodeSet::full ? NodeSet::full : NodeSet::interior);
  const index_t count = out.size();
  for (index_t i = 0; i < count; ++i) {
    const auto x = out.node_set() == NodeSet::interior ? fine.interior_coords(i)
                                                       : fine.full_coords(i);
    std::array<int, 3> cell{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      const double c = x[a] / gc.spacing(a);
      int j = static_cast<int>(std::floor(c));
      j = std::clamp(j, 0, gc.n(a));  // full lattice has nodes 0 .. n+1
      cell[a] = j;
      frac[a] = c - j;
    }
    double v = 0.0;
    const int corners = 1 << d;
    for (int corner = 0; corner < corners; ++corner) {
      double w = 1.0;
      std::array<int, 3> jj{cell[0], d > 1 ? cell[1] : 0, d > 2 ? cell[2] : 0};
      for (int a = 0; a < d; ++a) {
        if (corner & (1 << a)) {
          jj[a] += 1;
          w *= frac[a];
        } else {
          w *= 1.0 - frac[a];
        }
      }
      v += w * src[gc.full_index(jj[0], jj[1], jj[2])];
    }
    out[i] = v;
  }
  return out;
}

// H01 inner product of homogeneous-trace fields, <(-Delta_h)a, b>_{L2}.
inline double dot_h01(const ScalarField& a, const ScalarField& b) {
  check_compatible(a, b, "dot_h01");
  if (a.node_set() != NodeSet::interior)
    throw std::invalid_argument("dot_h01: requires homogeneous-trace fields");
  std::vector<double> img;
  detail::apply_second_order_stencil(
      a.grid(), a.values(), false, [](index_t, int, int) { return 0.0; }, img);
  double s = 0.0;
  for (index_t i = 0; i < b.size(); ++i) s += img[i] * b[i];
  return s * a.grid().cell_volume();
}

}  // namespace sbp
