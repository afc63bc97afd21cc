// Independent oracles used by the test suite only: a dense brute-force
// assembler on a different quadrature rule, a dense LU solver, and a pixel
// rasterization of tooth polygons for component counting. These never call
// into the code paths they check.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "brush/geometry.hpp"
#include "brush/mesh.hpp"

namespace oracle {

using brush::Point;
using brush::TriMesh;

// Barycentric coordinates via signed area ratios.
inline std::array<double, 3> barycentric(const Point& a, const Point& b,
                                         const Point& c, double x, double y) {
  auto area2 = [](const Point& p, const Point& q, const Point& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  double full = area2(a, b, c);
  Point p{x, y};
  return {area2(p, b, c) / full, area2(a, p, c) / full,
          area2(a, b, p) / full};
}

// Dense assembly of int w*(grad phi_i . grad phi_j + phi_i phi_j) with an
// order-4 six-point rule and area-ratio basis evaluation.
inline std::vector<std::vector<double>> dense_assemble(
    const TriMesh& mesh, const std::function<double(double, double)>& w = {}) {
  const int n = mesh.vertex_count();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  const double w1 = 0.223381589678011, a1 = 0.445948490915965;
  const double w2 = 0.109951743655322, a2 = 0.091576213509771;
  std::vector<std::array<double, 4>> rule;
  for (auto [wt, aa] : {std::pair{w1, a1}, std::pair{w2, a2}}) {
    rule.push_back({1 - 2 * aa, aa, aa, wt});
    rule.push_back({aa, 1 - 2 * aa, aa, wt});
    rule.push_back({aa, aa, 1 - 2 * aa, wt});
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Point &a = mesh.vertices[tr[0]], &b = mesh.vertices[tr[1]],
                &c = mesh.vertices[tr[2]];
    double area = mesh.tri_area(t);
    // Gradients of the area-ratio coordinates.
    double det = 2.0 * area;
    double gx[3] = {(b.y - c.y) / det, (c.y - a.y) / det, (a.y - b.y) / det};
    double gy[3] = {(c.x - b.x) / det, (a.x - c.x) / det, (b.x - a.x) / det};
    for (const auto& q : rule) {
      double x = q[0] * a.x + q[1] * b.x + q[2] * c.x;
      double y = q[0] * a.y + q[1] * b.y + q[2] * c.y;
      auto lam = barycentric(a, b, c, x, y);
      double wq = w ? w(x, y) : 1.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          A[tr[i]][tr[j]] += area * q[3] * wq *
                             (gx[i] * gx[j] + gy[i] * gy[j] + lam[i] * lam[j]);
    }
  }
  return A;
}

// Dense LU with partial pivoting.
inline std::vector<double> dense_lu_solve(std::vector<std::vector<double>> A,
                                          std::vector<double> b) {
  const int n = int(A.size());
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[p][k])) p = i;
    std::swap(A[k], A[p]);
    std::swap(b[k], b[p]);
    for (int i = k + 1; i < n; ++i) {
      double f = A[i][k] / A[k][k];
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

// Crossing-number point-in-polygon test.
inline bool inside_polygon(const std::vector<Point>& poly, double x,
                           double y) {
  bool in = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    bool cross = (poly[i].y > y) != (poly[j].y > y);
    if (cross &&
        x < poly[j].x + (poly[i].x - poly[j].x) * (y - poly[j].y) /
                            (poly[i].y - poly[j].y))
      in = !in;
  }
  return in;
}

// Counts connected pixel components of the polygon restricted to a horizontal
// band, on an nx x ny raster of the bounding box.
inline int raster_components(const std::vector<Point>& poly, double y_lo,
                             double y_hi, int nx = 400, int ny = 400) {
  double xmin = poly[0].x, xmax = poly[0].x;
  for (const Point& p : poly) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  std::vector<char> in(size_t(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy) {
    double y = y_lo + (iy + 0.5) * (y_hi - y_lo) / ny;
    for (int ix = 0; ix < nx; ++ix) {
      double x = xmin + (ix + 0.5) * (xmax - xmin) / nx;
      in[size_t(iy) * nx + ix] = inside_polygon(poly, x, y) ? 1 : 0;
    }
  }
  std::vector<int> comp(size_t(nx) * ny, -1);
  int count = 0;
  for (size_t seed = 0; seed < in.size(); ++seed) {
    if (!in[seed] || comp[seed] >= 0) continue;
    std::vector<size_t> stack{seed};
    comp[seed] = count;
    while (!stack.empty()) {
      size_t s = stack.back();
      stack.pop_back();
      int ix = int(s % nx), iy = int(s / nx);
      const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int jx = ix + dx[d], jy = iy + dy[d];
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
        size_t js = size_t(jy) * nx + jx;
        if (in[js] && comp[js] < 0) {
          comp[js] = count;
          stack.push_back(js);
        }
      }
    }
    ++count;
  }
  return count;
}

inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

}  // namespace oracle
