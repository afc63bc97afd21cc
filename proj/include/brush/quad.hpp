// Quadrature rules shared by the unfolding checks, the graph isometry and the
// coupled limit assembly.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "brush/mesh.hpp"

namespace brush {

struct GaussPoint {
  double t = 0.0;  // abscissa in [0,1]
  double w = 0.0;  // weight, sum = 1
};

// Gauss-Legendre on [0,1]; n-point rule is exact to degree 2n-1.
inline const std::vector<GaussPoint>& gauss01(int n) {
  static const std::vector<GaussPoint> g1{{0.5, 1.0}};
  static const std::vector<GaussPoint> g2{
      {0.5 - 0.5 / 1.7320508075688772, 0.5},
      {0.5 + 0.5 / 1.7320508075688772, 0.5}};
  static const std::vector<GaussPoint> g3{
      {0.5 - 0.5 * 0.7745966692414834, 5.0 / 18.0},
      {0.5, 8.0 / 18.0},
      {0.5 + 0.5 * 0.7745966692414834, 5.0 / 18.0}};
  static const std::vector<GaussPoint> g5{
      {0.5 - 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891},
      {0.5 - 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
      {0.5, 0.5 * 0.5688888888888889},
      {0.5 + 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
      {0.5 + 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891}};
  switch (n) {
    case 1: return g1;
    case 2: return g2;
    case 3: return g3;
    default: return g5;
  }
}

struct TriQuadPoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;           // weight, sum = 1
};

// Six-point order-4 triangle rule.
inline const std::vector<TriQuadPoint>& tri_quad_order4() {
  static const std::vector<TriQuadPoint> pts = [] {
    std::vector<TriQuadPoint> v;
    const double w1 = 0.223381589678011, a1 = 0.445948490915965;
    const double w2 = 0.109951743655322, a2 = 0.091576213509771;
    for (auto [w, a] : {std::pair{w1, a1}, std::pair{w2, a2}}) {
      v.push_back({1 - 2 * a, a, a, w});
      v.push_back({a, 1 - 2 * a, a, w});
      v.push_back({a, a, 1 - 2 * a, w});
    }
    return v;
  }();
  return pts;
}

// Order-4 quadrature of a function over all (or selected) mesh triangles.
template <class F>
double integrate_order4(const TriMesh& mesh, F&& f,
                        const std::function<bool(int)>& keep = {}) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (keep && !keep(t)) continue;
    const auto& tr = mesh.triangles[t];
    const Point& a = mesh.vertices[tr[0]];
    const Point& b = mesh.vertices[tr[1]];
    const Point& c = mesh.vertices[tr[2]];
    double area = mesh.tri_area(t);
    for (const TriQuadPoint& q : tri_quad_order4()) {
      double x = q.l0 * a.x + q.l1 * b.x + q.l2 * c.x;
      double y = q.l0 * a.y + q.l1 * b.y + q.l2 * c.y;
      s += area * q.w * f(x, y);
    }
  }
  return s;
}

}  // namespace brush
