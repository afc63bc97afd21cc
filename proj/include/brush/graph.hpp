// Metric-graph structure of a tooth cell: slab levels, one edge per connected
// slab piece with its exact section-width weight, joins across level lines,
// and the joint vertex sets that carry continuity and flux coupling. Also the
// two directions of the cell/graph correspondence: extending edge functions
// to xi-constant fields on the cell and restricting such fields back, with
// the norm identity between the weighted graph norm and the cell H1 norm.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "brush/mesh.hpp"
#include "brush/quad.hpp"

namespace brush {

struct DecompositionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContinuityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PiecewiseLinear {
  std::vector<double> ys;
  std::vector<double> vals;

  double operator()(double y) const {
    if (y <= ys.front()) return vals.front();
    if (y >= ys.back()) return vals.back();
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    size_t k = size_t(it - ys.begin());
    double t = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
    return vals[k - 1] + t * (vals[k] - vals[k - 1]);
  }
};

struct GraphEdge {
  int slab = 0;  // 1-based
  int comp = 0;  // 1-based, left to right
  double y_lo = 0.0, y_hi = 0.0;
  PiecewiseLinear width;  // section width; endpoint values are one-sided limits
  int piece = 0;          // trapezoid index in the tooth mesh
};

// Vertex group between slab `stage` and `stage + 1`: the edges below / above
// one connected component of the doubled slab.
struct Joint {
  int stage = 0;
  int k = 0;  // 1-based component rank
  std::vector<int> below;  // edge ids in slab `stage`
  std::vector<int> above;  // edge ids in slab `stage + 1`
};

struct GraphDecomposition {
  const ToothMesh* tm = nullptr;
  std::vector<double> levels;
  std::vector<GraphEdge> edges;  // edge id == trapezoid index
  std::vector<Joint> joints;     // ordered by (stage, k)
  int root_edge = 0;

  int slab_count() const { return int(levels.size()) - 1; }
  int edges_in_slab(int slab) const {
    return tm->slabs.pieces_in_slab(slab);
  }
  int edge_id(int slab, int comp) const {
    return tm->piece_index(slab, comp);
  }
  double total_weight_area() const {
    double s = 0.0;
    for (const GraphEdge& e : edges)
      s += 0.5 * (e.width.vals.front() + e.width.vals.back()) *
           (e.y_hi - e.y_lo);
    return s;
  }
};

namespace graphdetail {

// Connected components over a triangle subset, via shared-edge adjacency.
inline std::vector<int> flood_components(
    const TriMesh& mesh, const std::vector<int>& tri_ids,
    const std::map<std::pair<int, int>, std::vector<int>>& adjacency) {
  std::vector<int> comp(mesh.triangle_count(), -1);
  std::vector<char> in_set(mesh.triangle_count(), 0);
  for (int t : tri_ids) in_set[t] = 1;
  int next = 0;
  for (int seed : tri_ids) {
    if (comp[seed] >= 0) continue;
    comp[seed] = next;
    std::vector<int> stack{seed};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      const auto& tr = mesh.triangles[t];
      for (int e = 0; e < 3; ++e) {
        int a = tr[e], b = tr[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        for (int s : adjacency.at({a, b}))
          if (in_set[s] && comp[s] < 0) {
            comp[s] = next;
            stack.push_back(s);
          }
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace graphdetail

// Extracts the graph of a meshed tooth. Slab components are recovered by
// flood fill on triangle adjacency and must coincide with the trapezoid
// pieces; section widths come from the trapezoid corners, so the endpoint
// values are the one-sided limits, not the (possibly smaller) measure of the
// section on the level line itself.
inline GraphDecomposition decompose(const ToothMesh& tm) {
  GraphDecomposition d;
  d.tm = &tm;
  d.levels = tm.slabs.levels;
  const SlabStructure& sl = tm.slabs;
  const TriMesh& mesh = tm.mesh;
  auto adjacency = edge_to_triangles(mesh);

  // Edges from trapezoids, with the flood-fill cross-check per slab.
  const double scale = [&] {
    double s = 0.0;
    for (const Trapezoid& tr : sl.pieces)
      s = std::max({s, tr.width_bot(), tr.width_top()});
    return s;
  }();
  for (size_t p = 0; p < sl.pieces.size(); ++p) {
    const Trapezoid& tr = sl.pieces[p];
    GraphEdge e;
    e.slab = tr.slab;
    e.comp = tr.comp;
    e.y_lo = tr.y_bot;
    e.y_hi = tr.y_top;
    e.width.ys = {tr.y_bot, tr.y_top};
    e.width.vals = {tr.width_bot(), tr.width_top()};
    e.piece = int(p);
    if (!(tr.width_bot() > 1e-12 * scale) ||
        !(tr.width_top() > 1e-12 * scale))
      throw DecompositionError(
          "not nicely decomposed: section width vanishes on slab " +
          std::to_string(tr.slab));
    d.edges.push_back(e);
  }
  for (int slab = 1; slab <= sl.slab_count(); ++slab) {
    std::vector<int> tri_ids;
    for (int t = 0; t < mesh.triangle_count(); ++t)
      if (mesh.tags[t].slab == slab) tri_ids.push_back(t);
    std::vector<int> comp =
        graphdetail::flood_components(mesh, tri_ids, adjacency);
    // Each flood component must be exactly one trapezoid; otherwise some slab
    // piece has a disconnected horizontal section.
    std::map<int, int> flood_of_piece;
    for (int t : tri_ids) {
      int piece = tm.piece_index(slab, mesh.tags[t].comp);
      auto it = flood_of_piece.find(piece);
      if (it == flood_of_piece.end())
        flood_of_piece[piece] = comp[t];
      else if (it->second != comp[t])
        throw DecompositionError(
            "not nicely decomposed: slab piece splits into several "
            "components");
    }
    std::map<int, int> piece_of_flood;
    for (auto [piece, fl] : flood_of_piece) {
      auto it = piece_of_flood.find(fl);
      if (it == piece_of_flood.end())
        piece_of_flood[fl] = piece;
      else if (it->second != piece)
        throw DecompositionError(
            "not nicely decomposed: distinct slab pieces are connected");
    }
  }
  if (sl.pieces_in_slab(1) != 1)
    throw DecompositionError("root slab must have a single component");
  d.root_edge = d.edge_id(1, 1);

  // Joints: connected components of each doubled slab.
  for (int stage = 1; stage < sl.slab_count(); ++stage) {
    std::vector<int> tri_ids;
    for (int t = 0; t < mesh.triangle_count(); ++t)
      if (mesh.tags[t].slab == stage || mesh.tags[t].slab == stage + 1)
        tri_ids.push_back(t);
    std::vector<int> comp =
        graphdetail::flood_components(mesh, tri_ids, adjacency);
    std::map<int, int> first_piece;  // orders the joints deterministically
    for (int t : tri_ids) {
      int piece = tm.piece_index(mesh.tags[t].slab, mesh.tags[t].comp);
      auto [it, fresh] = first_piece.try_emplace(comp[t], piece);
      if (!fresh) it->second = std::min(it->second, piece);
    }
    std::map<int, std::vector<int>> below, above;
    for (int t : tri_ids) {
      int piece = tm.piece_index(mesh.tags[t].slab, mesh.tags[t].comp);
      auto& vec = mesh.tags[t].slab == stage ? below[comp[t]] : above[comp[t]];
      if (std::find(vec.begin(), vec.end(), piece) == vec.end())
        vec.push_back(piece);
    }
    std::vector<int> flood_ids;
    for (auto& [fl, fp] : first_piece) flood_ids.push_back(fl);
    std::sort(flood_ids.begin(), flood_ids.end(), [&](int a, int b) {
      return first_piece[a] < first_piece[b];
    });
    int k = 1;
    for (int fl : flood_ids) {
      Joint j;
      j.stage = stage;
      j.k = k++;
      j.below = below[fl];
      j.above = above[fl];
      std::sort(j.below.begin(), j.below.end());
      std::sort(j.above.begin(), j.above.end());
      d.joints.push_back(j);
    }
  }

  // Every edge must sit in exactly one joint per adjacent interior level.
  for (int stage = 1; stage < sl.slab_count(); ++stage) {
    std::vector<int> seen_b, seen_a;
    for (const Joint& j : d.joints) {
      if (j.stage != stage) continue;
      seen_b.insert(seen_b.end(), j.below.begin(), j.below.end());
      seen_a.insert(seen_a.end(), j.above.begin(), j.above.end());
    }
    if (int(seen_b.size()) != sl.pieces_in_slab(stage) ||
        int(seen_a.size()) != sl.pieces_in_slab(stage + 1))
      throw DecompositionError("internal: joint sets do not partition edges");
  }
  return d;
}

// True iff the two slab pieces share an interface of positive length on the
// level line between them.
inline bool joins(const GraphDecomposition& d, int slab, int comp_below,
                  int comp_above) {
  const Trapezoid& lo = d.tm->slabs.piece(slab, comp_below);
  const Trapezoid& hi = d.tm->slabs.piece(slab + 1, comp_above);
  double l = std::max(lo.xl_top, hi.xl_bot);
  double r = std::min(lo.xr_top, hi.xr_bot);
  return r - l > 0.0;
}

// Scalar function on one edge: piecewise polynomial in the local variable
// (y - breakpoint), ascending coefficients per interval.
struct Piecewise1D {
  std::vector<double> ys;
  std::vector<std::vector<double>> coef;

  static Piecewise1D linear_nodes(std::vector<double> ys,
                                  const std::vector<double>& vals) {
    Piecewise1D p;
    p.ys = std::move(ys);
    for (size_t k = 0; k + 1 < p.ys.size(); ++k) {
      double dy = p.ys[k + 1] - p.ys[k];
      p.coef.push_back({vals[k], (vals[k + 1] - vals[k]) / dy});
    }
    return p;
  }

  static Piecewise1D constant(double lo, double hi, double c) {
    Piecewise1D p;
    p.ys = {lo, hi};
    p.coef = {{c}};
    return p;
  }

  size_t interval_of(double y) const {
    if (y <= ys.front()) return 0;
    if (y >= ys.back()) return coef.size() - 1;
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    return size_t(it - ys.begin()) - 1;
  }

  double eval(double y) const {
    size_t k = interval_of(y);
    double t = y - ys[k];
    double v = 0.0;
    for (size_t d = coef[k].size(); d-- > 0;) v = v * t + coef[k][d];
    return v;
  }

  double deriv(double y) const {
    size_t k = interval_of(y);
    double t = y - ys[k];
    double v = 0.0;
    for (size_t d = coef[k].size(); d-- > 1;)
      v = v * t + coef[k][d] * double(d);
    return v;
  }
};

// One function per edge id.
using GraphFunction = std::vector<Piecewise1D>;

// Verifies the vertex continuity conditions: wherever two pieces join across
// a level line, the incident edge functions agree at that level.
inline void check_continuity(const GraphDecomposition& d,
                             const GraphFunction& f, double tol = 1e-10) {
  for (const Joint& j : d.joints) {
    double level = d.levels[j.stage];
    for (int eb : j.below)
      for (int ea : j.above) {
        const GraphEdge& b = d.edges[eb];
        const GraphEdge& a = d.edges[ea];
        if (!joins(d, b.slab, b.comp, a.comp)) continue;
        double gap = std::abs(f[eb].eval(level) - f[ea].eval(level));
        if (gap > tol)
          throw ContinuityError("continuity violated at stage " +
                                std::to_string(j.stage) + " joint " +
                                std::to_string(j.k) + " (gap " +
                                std::to_string(gap) + ")");
      }
  }
}

// Weighted graph norm squared: sum over edges of int width * (f^2 + f'^2).
// Exact for polynomial pieces up to cubic (5-point Gauss per subinterval).
inline double graph_norm_sq(const GraphDecomposition& d,
                            const GraphFunction& f) {
  double total = 0.0;
  for (size_t e = 0; e < d.edges.size(); ++e) {
    const GraphEdge& ed = d.edges[e];
    std::vector<double> cuts{ed.y_lo, ed.y_hi};
    for (double y : f[e].ys)
      if (y > ed.y_lo && y < ed.y_hi) cuts.push_back(y);
    std::sort(cuts.begin(), cuts.end());
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
      double len = cuts[k + 1] - cuts[k];
      if (!(len > 0.0)) continue;
      for (const GaussPoint& g : gauss01(5)) {
        double y = cuts[k] + g.t * len;
        double v = f[e].eval(y);
        double s = f[e].deriv(y);
        total += len * g.w * ed.width(y) * (v * v + s * s);
      }
    }
  }
  return total;
}

// Cell H1 norm squared of the xi-constant extension, integrated over the
// triangulated cell geometry: each triangle is sliced horizontally at its own
// vertices and at the function breakpoints, and each slice integrates
// (linear section length) * (f^2 + f'^2) exactly. This route never touches
// the stored width functions.
inline double extension_h1_sq(const GraphDecomposition& d,
                              const GraphFunction& f) {
  const TriMesh& mesh = d.tm->mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    int e = d.edge_id(mesh.tags[t].slab, mesh.tags[t].comp);
    const auto& tr = mesh.triangles[t];
    std::array<Point, 3> v{mesh.vertices[tr[0]], mesh.vertices[tr[1]],
                           mesh.vertices[tr[2]]};
    std::sort(v.begin(), v.end(),
              [](const Point& a, const Point& b) { return a.y < b.y; });
    auto x_on = [](const Point& a, const Point& b, double y) {
      return a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y);
    };
    // Section length of the triangle at height y, linear on both sub-ranges.
    auto chord = [&](double y) {
      if (y <= v[0].y || y >= v[2].y) return 0.0;
      double xa = x_on(v[0], v[2], y);
      double xb = y <= v[1].y ? x_on(v[0], v[1], y) : x_on(v[1], v[2], y);
      return std::abs(xa - xb);
    };
    for (int half = 0; half < 2; ++half) {
      double ylo = half == 0 ? v[0].y : v[1].y;
      double yhi = half == 0 ? v[1].y : v[2].y;
      if (!(yhi > ylo)) continue;
      std::vector<double> cuts{ylo, yhi};
      for (double y : f[e].ys)
        if (y > ylo && y < yhi) cuts.push_back(y);
      std::sort(cuts.begin(), cuts.end());
      for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        double len = cuts[k + 1] - cuts[k];
        if (!(len > 0.0)) continue;
        for (const GaussPoint& g : gauss01(5)) {
          double y = cuts[k] + g.t * len;
          double val = f[e].eval(y);
          double sl = f[e].deriv(y);
          total += len * g.w * chord(y) * (val * val + sl * sl);
        }
      }
    }
  }
  return total;
}

inline double isometry_gap(const GraphDecomposition& d,
                           const GraphFunction& f) {
  return std::abs(graph_norm_sq(d, f) - extension_h1_sq(d, f));
}

// Nodal values on the reference mesh of the xi-constant extension. Checks
// continuity first; nodes on a level line take the value of the lowest
// incident edge after asserting all incident edges agree.
inline std::vector<double> extend_to_cell(const GraphDecomposition& d,
                                          const GraphFunction& f,
                                          double tol = 1e-10) {
  check_continuity(d, f, tol);
  const TriMesh& mesh = d.tm->mesh;
  std::vector<double> out(mesh.vertices.size(), 0.0);
  std::vector<int> owner(mesh.vertices.size(), -1);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    int e = d.edge_id(mesh.tags[t].slab, mesh.tags[t].comp);
    for (int vid : mesh.triangles[t]) {
      double val = f[e].eval(mesh.vertices[vid].y);
      if (owner[vid] < 0) {
        owner[vid] = e;
        out[vid] = val;
      } else if (std::abs(out[vid] - val) > tol) {
        throw ContinuityError(
            "extension not well defined at a level-line node");
      } else if (e < owner[vid]) {
        owner[vid] = e;
        out[vid] = val;
      }
    }
  }
  return out;
}

// Per-edge P1 restriction of a xi-constant nodal field, on the mesh row
// partition of each slab piece. Verifies xi-constancy row by row.
inline GraphFunction restrict_to_graph(const GraphDecomposition& d,
                                       const std::vector<double>& nodal,
                                       double tol = 1e-10) {
  const ToothMesh& tm = *d.tm;
  GraphFunction f(d.edges.size());
  for (size_t e = 0; e < d.edges.size(); ++e) {
    const auto& rows = tm.rows[d.edges[e].piece];
    std::vector<double> ys, vals;
    for (const auto& row : rows) {
      double v = nodal[row.front()];
      for (int vid : row)
        if (std::abs(nodal[vid] - v) > tol)
          throw ContinuityError("field is not constant across a section");
      ys.push_back(tm.mesh.vertices[row.front()].y);
      vals.push_back(v);
    }
    f[e] = Piecewise1D::linear_nodes(std::move(ys), vals);
  }
  return f;
}

}  // namespace brush
