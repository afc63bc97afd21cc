// P1 finite elements on triangle meshes: weighted stiffness+mass assembly,
// load vectors, a Jacobi-preconditioned conjugate gradient solver, and norm /
// error evaluation. Quadrature is the order-2 edge-midpoint rule, which is
// exact for every P1 x P1 product, so discrete identities hold to rounding.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "brush/expr.hpp"
#include "brush/mesh.hpp"

namespace brush {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual = 0.0;
};

// Nodal P1 coefficient vector over a mesh.
struct DiscreteField {
  const TriMesh* mesh = nullptr;
  std::vector<double> values;

  DiscreteField() = default;
  DiscreteField(const TriMesh& m, std::vector<double> v)
      : mesh(&m), values(std::move(v)) {
    check();
  }
  explicit DiscreteField(const TriMesh& m)
      : mesh(&m), values(m.vertices.size(), 0.0) {}

  void check() const {
    if (!mesh || values.size() != mesh->vertices.size())
      throw AssemblyError("field size does not match mesh");
    for (double v : values)
      if (!std::isfinite(v)) throw AssemblyError("field has non-finite values");
  }
};

namespace femdetail {

struct TriGeom {
  double area;
  std::array<double, 3> gx, gy;     // P1 basis gradients
  std::array<Point, 3> mid;         // edge midpoints (order-2 quadrature)
  std::array<std::array<double, 3>, 3> phi_mid;  // phi_i at midpoint q
};

inline TriGeom tri_geom(const TriMesh& mesh, int t) {
  const auto& tr = mesh.triangles[t];
  const Point& a = mesh.vertices[tr[0]];
  const Point& b = mesh.vertices[tr[1]];
  const Point& c = mesh.vertices[tr[2]];
  TriGeom g;
  double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  g.area = 0.5 * det;
  g.gx = {(b.y - c.y) / det, (c.y - a.y) / det, (a.y - b.y) / det};
  g.gy = {(c.x - b.x) / det, (a.x - c.x) / det, (b.x - a.x) / det};
  g.mid = {Point{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)},
           Point{0.5 * (b.x + c.x), 0.5 * (b.y + c.y)},
           Point{0.5 * (c.x + a.x), 0.5 * (c.y + a.y)}};
  // Midpoint q lies opposite vertex (q+2)%3.
  g.phi_mid = {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
  return g;
}

}  // namespace femdetail

// Symmetric positive definite sparse matrix in compressed row form.
// Construction verifies symmetry (1e-14 relative) and a positive diagonal.
class SparseSpd {
 public:
  SparseSpd(int n, std::vector<std::array<int, 2>> idx,
            std::vector<double> val)
      : n_(n) {
    std::vector<int> count(n, 0);
    for (auto& ij : idx) ++count[ij[0]];
    row_ptr_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) row_ptr_[i + 1] = row_ptr_[i] + count[i];
    std::vector<int> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    std::vector<int> col_raw(idx.size());
    std::vector<double> val_raw(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) {
      int pos = cursor[idx[k][0]]++;
      col_raw[pos] = idx[k][1];
      val_raw[pos] = val[k];
    }
    // Merge duplicates per row, keeping columns sorted.
    col_.reserve(col_raw.size());
    val_.reserve(val_raw.size());
    std::vector<int> new_ptr(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      int lo = row_ptr_[i], hi = row_ptr_[i + 1];
      std::vector<std::pair<int, double>> row;
      row.reserve(hi - lo);
      for (int k = lo; k < hi; ++k) row.push_back({col_raw[k], val_raw[k]});
      std::sort(row.begin(), row.end());
      for (auto& [c, v] : row) {
        if (!col_.empty() && int(col_.size()) > new_ptr[i] && col_.back() == c)
          val_.back() += v;
        else {
          col_.push_back(c);
          val_.push_back(v);
        }
      }
      new_ptr[i + 1] = int(col_.size());
    }
    row_ptr_ = std::move(new_ptr);
    verify();
  }

  int size() const { return n_; }

  double diag(int i) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (col_[k] == i) return val_[k];
    return 0.0;
  }

  void mul(const std::vector<double>& x, std::vector<double>& y) const {
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        s += val_[k] * x[col_[k]];
      y[i] = s;
    }
  }

  double quad_form(const std::vector<double>& x) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
      double r = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        r += val_[k] * x[col_[k]];
      s += x[i] * r;
    }
    return s;
  }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return col_; }
  const std::vector<double>& vals() const { return val_; }

 private:
  void verify() const {
    double scale = 0.0;
    for (double v : val_) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < n_; ++i) {
      bool has_diag = false;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        int j = col_[k];
        if (j == i) {
          if (!(val_[k] > 0.0))
            throw AssemblyError("matrix rejected: nonpositive diagonal entry");
          has_diag = true;
          continue;
        }
        double vt = 0.0;
        for (int m = row_ptr_[j]; m < row_ptr_[j + 1]; ++m)
          if (col_[m] == i) vt = val_[m];
        if (std::abs(val_[k] - vt) > 1e-14 * scale)
          throw AssemblyError("matrix rejected: not symmetric");
      }
      if (!has_diag)
        throw AssemblyError("matrix rejected: missing diagonal entry");
    }
  }

  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

using Weight = std::function<double(double, double)>;

// A[u,v] = int w * (grad(phi_u).grad(phi_v) + phi_u phi_v). The weight enters
// the stiffness and mass parts identically; it must be nonnegative at every
// quadrature point (zero allowed).
inline SparseSpd assemble(const TriMesh& mesh, const Weight& w = {}) {
  std::vector<std::array<int, 2>> idx;
  std::vector<double> val;
  idx.reserve(mesh.triangles.size() * 9);
  val.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(mesh, t);
    if (!(g.area > 0.0)) throw AssemblyError("nonpositive triangle area");
    std::array<double, 3> wq{1.0, 1.0, 1.0};
    if (w)
      for (int q = 0; q < 3; ++q) {
        wq[q] = w(g.mid[q].x, g.mid[q].y);
        if (wq[q] < 0.0)
          throw AssemblyError("negative weight at a quadrature point");
      }
    double wbar = (wq[0] + wq[1] + wq[2]) / 3.0;
    const auto& tr = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double kij = wbar * g.area * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j]);
        double mij = 0.0;
        for (int q = 0; q < 3; ++q)
          mij += (g.area / 3.0) * wq[q] * g.phi_mid[q][i] * g.phi_mid[q][j];
        idx.push_back({tr[i], tr[j]});
        val.push_back(kij + mij);
      }
  }
  return SparseSpd(mesh.vertex_count(), std::move(idx), std::move(val));
}

// b[v] = int w * f * phi_v with the same order-2 rule as the assembly.
inline std::vector<double> load(const TriMesh& mesh,
                                const std::function<double(double, double)>& f,
                                const Weight& w = {}) {
  std::vector<double> b(mesh.vertices.size(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(mesh, t);
    const auto& tr = mesh.triangles[t];
    for (int q = 0; q < 3; ++q) {
      double wq = w ? w(g.mid[q].x, g.mid[q].y) : 1.0;
      if (wq < 0.0)
        throw AssemblyError("negative weight at a quadrature point");
      double fq = f(g.mid[q].x, g.mid[q].y);
      for (int i = 0; i < 3; ++i)
        b[tr[i]] += (g.area / 3.0) * wq * fq * g.phi_mid[q][i];
    }
  }
  return b;
}

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Conjugate gradients with diagonal preconditioning. Terminates when the
// true relative residual |b - Ax| / |b| drops below tol.
inline CgResult solve_spd(const SparseSpd& A, const std::vector<double>& b,
                          double tol = 1e-10, int max_iter = 100000) {
  const int n = A.size();
  CgResult res;
  res.x.assign(n, 0.0);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return res;

  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) inv_diag[i] = 1.0 / A.diag(i);

  std::vector<double> r = b, z(n), p(n), Ap(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];
  double rnorm = bnorm;
  for (int it = 1; it <= max_iter; ++it) {
    A.mul(p, Ap);
    double pAp = 0.0;
    for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    if (!(pAp > 0.0))
      throw SolverError("matrix is not positive definite in CG", rnorm / bnorm);
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);
    res.iterations = it;
    if (rnorm <= tol * bnorm) {
      res.relative_residual = rnorm / bnorm;
      return res;
    }
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_new += r[i] * z[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("CG did not converge within max_iter", rnorm / bnorm);
}

// L2 and H1-seminorm distances between a P1 field and a closed-form function,
// by elementwise order-2 quadrature. Returns norms (not squares).
struct FieldError {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

inline FieldError h1_error(const TriMesh& mesh, const std::vector<double>& u,
                           const Expr& v) {
  Expr vx = v.dx(), vy = v.dy();
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(mesh, t);
    const auto& tr = mesh.triangles[t];
    double ux = 0.0, uy = 0.0;
    for (int i = 0; i < 3; ++i) {
      ux += u[tr[i]] * g.gx[i];
      uy += u[tr[i]] * g.gy[i];
    }
    for (int q = 0; q < 3; ++q) {
      double uq = 0.0;
      for (int i = 0; i < 3; ++i) uq += u[tr[i]] * g.phi_mid[q][i];
      double dv = uq - v(g.mid[q].x, g.mid[q].y);
      double dgx = ux - vx(g.mid[q].x, g.mid[q].y);
      double dgy = uy - vy(g.mid[q].x, g.mid[q].y);
      l2 += (g.area / 3.0) * dv * dv;
      h1 += (g.area / 3.0) * (dgx * dgx + dgy * dgy);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

// Restricted H1 norm-squared pieces of the difference of two P1 fields,
// summed over the triangles selected by keep(t). Exact for P1 data.
inline double h1_diff_sq(const TriMesh& mesh, const std::vector<double>& u,
                         const std::vector<double>& v,
                         const std::function<bool(int)>& keep = {}) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (keep && !keep(t)) continue;
    auto g = femdetail::tri_geom(mesh, t);
    const auto& tr = mesh.triangles[t];
    double dx = 0.0, dy = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = u[tr[i]] - v[tr[i]];
      dx += d * g.gx[i];
      dy += d * g.gy[i];
    }
    s += g.area * (dx * dx + dy * dy);
    for (int q = 0; q < 3; ++q) {
      double dq = 0.0;
      for (int i = 0; i < 3; ++i)
        dq += (u[tr[i]] - v[tr[i]]) * g.phi_mid[q][i];
      s += (g.area / 3.0) * dq * dq;
    }
  }
  return s;
}

// H1 norm-squared of a P1 field over selected triangles (exact).
inline double h1_norm_sq(const TriMesh& mesh, const std::vector<double>& u,
                         const std::function<bool(int)>& keep = {}) {
  std::vector<double> zero(mesh.vertices.size(), 0.0);
  return h1_diff_sq(mesh, u, zero, keep);
}

// int f * u_h over the mesh, with the same rule as load().
inline double integrate_against(const TriMesh& mesh,
                                const std::function<double(double, double)>& f,
                                const std::vector<double>& u) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(mesh, t);
    const auto& tr = mesh.triangles[t];
    for (int q = 0; q < 3; ++q) {
      double uq = 0.0;
      for (int i = 0; i < 3; ++i) uq += u[tr[i]] * g.phi_mid[q][i];
      s += (g.area / 3.0) * f(g.mid[q].x, g.mid[q].y) * uq;
    }
  }
  return s;
}

// L2 norm-squared of a closed-form function over the mesh (order-2 rule).
inline double l2_norm_sq_of(const TriMesh& mesh,
                            const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(mesh, t);
    for (int q = 0; q < 3; ++q) {
      double fq = f(g.mid[q].x, g.mid[q].y);
      s += (g.area / 3.0) * fq * fq;
    }
  }
  return s;
}

}  // namespace brush
