// Conforming triangulations. The reference tooth is meshed once per run from
// its slab trapezoids (every slab level line becomes a mesh line), and the
// brush mesh instances that one mesh per tooth through the diagonal affine map
// (xi, y) -> (center + length*xi, y), glued node-to-node to a structured base
// rectangle mesh whose top edge carries the images of all tooth base nodes.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "brush/geometry.hpp"

namespace brush {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Mismatched mesh/field/solution combinations.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TriTag {
  int tooth = 0;  // 0 = base region, 1..N = tooth index
  int slab = 0;   // 1-based slab index inside the tooth, 0 for base
  int comp = 0;   // 1-based component rank inside the slab, 0 for base
};

enum class EdgeTag { Outer, ToothBase, SlabInterface };

struct TaggedEdge {
  int v0 = 0, v1 = 0;
  EdgeTag tag = EdgeTag::Outer;
  int index = 0;  // tooth index for ToothBase, level index for SlabInterface
};

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<TriTag> tags;
  std::vector<TaggedEdge> tagged_edges;

  int vertex_count() const { return int(vertices.size()); }
  int triangle_count() const { return int(triangles.size()); }

  double tri_area(int t) const {
    const auto& tr = triangles[t];
    const Point& a = vertices[tr[0]];
    const Point& b = vertices[tr[1]];
    const Point& c = vertices[tr[2]];
    return 0.5 *
           ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  }
  double total_area() const {
    double s = 0.0;
    for (int t = 0; t < triangle_count(); ++t) s += tri_area(t);
    return s;
  }
};

namespace detail {

inline double lerp_exact(double lo, double hi, int k, int n) {
  if (k == 0) return lo;
  if (k == n) return hi;
  return lo + (hi - lo) * (double(k) / double(n));
}

// Uniform subdivision of [lo, hi] with spacing <= h; endpoints exact.
inline std::vector<double> split_uniform(double lo, double hi, double h) {
  int n = std::max(1, int(std::ceil((hi - lo) / h - 1e-12)));
  std::vector<double> xs(n + 1);
  for (int k = 0; k <= n; ++k) xs[k] = lerp_exact(lo, hi, k, n);
  return xs;
}

// Triangulates the strip between two horizontal node chains (x increasing,
// bottom row strictly below the top row). Any merge order yields valid CCW
// triangles; advancing the smaller next-x keeps them well shaped.
inline void triangulate_strip(const std::vector<int>& bot,
                              const std::vector<double>& bx,
                              const std::vector<int>& top,
                              const std::vector<double>& tx, TriTag tag,
                              TriMesh& out) {
  size_t i = 0, j = 0;
  while (i + 1 < bot.size() || j + 1 < top.size()) {
    bool advance_bottom;
    if (i + 1 >= bot.size())
      advance_bottom = false;
    else if (j + 1 >= top.size())
      advance_bottom = true;
    else
      advance_bottom = bx[i + 1] <= tx[j + 1];
    if (advance_bottom) {
      out.triangles.push_back({bot[i], bot[i + 1], top[j]});
      ++i;
    } else {
      out.triangles.push_back({bot[i], top[j + 1], top[j]});
      ++j;
    }
    out.tags.push_back(tag);
  }
}

}  // namespace detail

// Reference tooth triangulation plus the structural data other modules need:
// the slab trapezoids, per-trapezoid node rows, and the base-row nodes.
struct ToothMesh {
  TriMesh mesh;
  ModelTooth tooth;
  SlabStructure slabs;
  double h = 0.0;
  // rows[p][r] = node ids of row r of trapezoid p, bottom row first.
  std::vector<std::vector<std::vector<int>>> rows;
  std::vector<int> base_nodes;  // nodes on y = 0, x increasing
  int piece_index(int slab, int comp) const {
    return slabs.slab_begin[slab - 1] + comp - 1;
  }
};

// Structural validity needed for meshing and graph work; unlike
// validate_tooth it does not require the unit base normalization.
inline void require_meshable_tooth(const ModelTooth& t) {
  if (t.polygon.size() < 3 || !polygon_is_simple(t.polygon))
    throw GeometryError("tooth polygon is not a simple closed polygon");
  if (polygon_signed_area(t.polygon) <= 0.0)
    throw GeometryError("tooth polygon must be counterclockwise");
  for (const Point& p : t.polygon)
    if (p.y < 0.0 || p.y > t.height)
      throw GeometryError("tooth polygon leaves the vertical strip");
}

inline ToothMesh mesh_tooth_reference(const ModelTooth& tooth, double h) {
  if (!(h > 0.0)) throw MeshError("mesh size h must be positive");
  if (h > tooth.delta0 + 1e-15)
    throw MeshError("mesh size h too coarse to resolve the base collar");
  require_meshable_tooth(tooth);

  ToothMesh tm;
  tm.tooth = tooth;
  tm.h = h;
  tm.slabs = slab_structure(tooth.polygon);
  const SlabStructure& sl = tm.slabs;
  const int levels = int(sl.levels.size());
  TriMesh& mesh = tm.mesh;

  // Shared node partition of every slab level line. Breakpoints are the
  // trapezoid corner abscissas touching the level, so rows of adjacent slabs
  // meet in identical nodes.
  std::vector<std::vector<double>> level_xs(levels);
  std::vector<std::vector<int>> level_ids(levels);
  for (int li = 0; li < levels; ++li) {
    std::vector<double> bps;
    std::vector<std::pair<double, double>> covered;
    for (const Trapezoid& tr : sl.pieces) {
      if (sl.levels[li] == tr.y_bot) {
        bps.push_back(tr.xl_bot);
        bps.push_back(tr.xr_bot);
        covered.push_back({tr.xl_bot, tr.xr_bot});
      }
      if (sl.levels[li] == tr.y_top) {
        bps.push_back(tr.xl_top);
        bps.push_back(tr.xr_top);
        covered.push_back({tr.xl_top, tr.xr_top});
      }
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    // Breakpoints are always nodes (a zero-width corner still needs one);
    // covered spans between them are filled uniformly.
    std::vector<double>& xs = level_xs[li];
    xs = bps;
    for (size_t b = 0; b + 1 < bps.size(); ++b) {
      double lo = bps[b], hi = bps[b + 1];
      bool in_domain = false;
      for (auto [cl, cr] : covered)
        if (cl <= lo && hi <= cr) in_domain = true;
      if (!in_domain) continue;
      std::vector<double> seg = detail::split_uniform(lo, hi, h);
      xs.insert(xs.end(), seg.begin() + 1, seg.end() - 1);
    }
    std::sort(xs.begin(), xs.end());
    level_ids[li].reserve(xs.size());
    for (double x : xs) {
      level_ids[li].push_back(mesh.vertex_count());
      mesh.vertices.push_back({x, sl.levels[li]});
    }
  }

  auto level_slice = [&](int li, double xl, double xr, std::vector<int>& ids,
                         std::vector<double>& xs) {
    const std::vector<double>& lx = level_xs[li];
    const std::vector<int>& lid = level_ids[li];
    ids.clear();
    xs.clear();
    for (size_t k = 0; k < lx.size(); ++k)
      if (lx[k] >= xl && lx[k] <= xr) {
        ids.push_back(lid[k]);
        xs.push_back(lx[k]);
      }
    if (xs.empty() || xs.front() != xl || xs.back() != xr)
      throw MeshError("internal: level partition misses a trapezoid corner");
  };

  // Mesh each trapezoid row by row; level rows reuse the shared partitions.
  tm.rows.resize(sl.pieces.size());
  for (size_t p = 0; p < sl.pieces.size(); ++p) {
    const Trapezoid& tr = sl.pieces[p];
    int ny = std::max(1, int(std::ceil((tr.y_top - tr.y_bot) / h - 1e-12)));
    std::vector<std::vector<int>> rows(ny + 1);
    std::vector<std::vector<double>> row_xs(ny + 1);
    level_slice(tr.slab - 1, tr.xl_bot, tr.xr_bot, rows[0], row_xs[0]);
    level_slice(tr.slab, tr.xl_top, tr.xr_top, rows[ny], row_xs[ny]);
    for (int r = 1; r < ny; ++r) {
      double y = detail::lerp_exact(tr.y_bot, tr.y_top, r, ny);
      std::vector<double> xs =
          detail::split_uniform(tr.left_at(y), tr.right_at(y), h);
      rows[r].reserve(xs.size());
      for (double x : xs) {
        rows[r].push_back(mesh.vertex_count());
        mesh.vertices.push_back({x, y});
      }
      row_xs[r] = std::move(xs);
    }
    TriTag tag{0, tr.slab, tr.comp};
    for (int r = 0; r < ny; ++r)
      detail::triangulate_strip(rows[r], row_xs[r], rows[r + 1], row_xs[r + 1],
                                tag, mesh);
    tm.rows[p] = std::move(rows);
  }

  // Base nodes and edge tags. Level 0 is the tooth base, interior levels are
  // slab interfaces, everything else on the boundary is outer.
  tm.base_nodes = level_ids[0];
  for (int li = 0; li < levels; ++li) {
    for (size_t k = 0; k + 1 < level_ids[li].size(); ++k) {
      // Consecutive partition nodes form an edge only inside a covered span.
      double xm = 0.5 * (level_xs[li][k] + level_xs[li][k + 1]);
      bool covered = false;
      for (const Trapezoid& tr : sl.pieces)
        if ((tr.y_bot == sl.levels[li] && tr.xl_bot <= xm && xm <= tr.xr_bot) ||
            (tr.y_top == sl.levels[li] && tr.xl_top <= xm && xm <= tr.xr_top))
          covered = true;
      if (!covered) continue;
      TaggedEdge e;
      e.v0 = level_ids[li][k];
      e.v1 = level_ids[li][k + 1];
      if (li == 0) {
        e.tag = EdgeTag::ToothBase;
        e.index = 0;
      } else if (li + 1 < levels) {
        e.tag = EdgeTag::SlabInterface;
        e.index = li;
      } else {
        e.tag = EdgeTag::Outer;
        e.index = 0;
      }
      mesh.tagged_edges.push_back(e);
    }
  }
  return tm;
}

// Brush triangulation: base vertices first (their indices equal the extracted
// base mesh's), then per-tooth images of the reference nodes, sharing the
// base-row nodes along each tooth base.
struct BrushMesh {
  TriMesh mesh;
  BrushSpec spec;
  ToothMesh ref;
  int base_vertex_count = 0;
  int base_tri_count = 0;
  std::vector<std::vector<int>> tooth_nodes;  // [n][ref node] -> brush node
  // Base-side node gluing each tooth base node, indexed by reference node id.
  // Equals tooth_nodes[n][r] on the shared base row.
  std::vector<std::vector<int>> tooth_base_nodes;
  std::vector<int> tooth_tri_begin;           // tooth n tris: [begin[n], begin[n+1])
  std::vector<int> trace_nodes;               // top-row nodes, x increasing

  int tooth_count() const { return int(tooth_nodes.size()); }
  double trace_x(int k) const { return mesh.vertices[trace_nodes[k]].x; }
};

inline BrushMesh mesh_brush(const BrushSpec& spec, double h_base,
                            double h_tooth) {
  validate_spec(spec);
  if (!(h_base > 0.0)) throw MeshError("mesh size h_base must be positive");

  BrushMesh bm;
  bm.spec = spec;
  bm.ref = mesh_tooth_reference(spec.tooth, h_tooth);
  const int teeth = int(spec.placements.size());
  TriMesh& mesh = bm.mesh;

  // Top-edge partition: images of the reference base nodes per tooth, the
  // attachment interval endpoints, and uniform fill in between.
  struct TopNode {
    double x;
    int tooth;     // 0 = plain partition node
    int ref_node;  // reference base node when tooth > 0
  };
  std::vector<TopNode> top;
  {
    std::vector<std::vector<TopNode>> blocks;
    for (int n = 0; n < teeth; ++n) {
      const Placement& pl = spec.placements[n];
      std::vector<TopNode> b;
      for (int r : bm.ref.base_nodes)
        b.push_back({pl.center + pl.length * bm.ref.mesh.vertices[r].x, n + 1,
                     r});
      blocks.push_back(std::move(b));
    }
    for (double x : {spec.attach_lo, spec.attach_hi})
      if (x > spec.base.x0 && x < spec.base.x1)
        blocks.push_back({{x, 0, -1}});
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) {
                return a.front().x < b.front().x;
              });
    double cur = spec.base.x0;
    top.push_back({cur, 0, -1});
    for (const auto& b : blocks) {
      if (b.front().x > cur) {
        std::vector<double> fill =
            detail::split_uniform(cur, b.front().x, h_base);
        for (size_t k = 1; k + 1 < fill.size(); ++k)
          top.push_back({fill[k], 0, -1});
      } else if (b.front().x < cur) {
        throw MeshError("internal: overlapping top-edge blocks");
      }
      for (const TopNode& tn : b)
        if (top.back().x != tn.x)
          top.push_back(tn);
      if (top.back().x != b.back().x)
        throw MeshError("internal: top-edge block collapsed");
      cur = top.back().x;
    }
    if (cur < spec.base.x1) {
      std::vector<double> fill =
          detail::split_uniform(cur, spec.base.x1, h_base);
      for (size_t k = 1; k < fill.size(); ++k) top.push_back({fill[k], 0, -1});
    }
  }

  // Base rectangle: uniform rows below, the irregular partition on the top row.
  std::vector<double> xu =
      detail::split_uniform(spec.base.x0, spec.base.x1, h_base);
  int rows = std::max(1, int(std::ceil(-spec.base.y0 / h_base - 1e-12)));
  std::vector<std::vector<int>> row_ids(rows + 1);
  std::vector<std::vector<double>> row_xs(rows + 1);
  for (int r = 0; r < rows; ++r) {
    double y = detail::lerp_exact(spec.base.y0, 0.0, r, rows);
    row_xs[r] = xu;
    row_ids[r].reserve(xu.size());
    for (double x : xu) {
      row_ids[r].push_back(mesh.vertex_count());
      mesh.vertices.push_back({x, y});
    }
  }
  row_xs[rows].reserve(top.size());
  row_ids[rows].reserve(top.size());
  for (const TopNode& tn : top) {
    row_xs[rows].push_back(tn.x);
    row_ids[rows].push_back(mesh.vertex_count());
    mesh.vertices.push_back({tn.x, 0.0});
  }
  for (int r = 0; r < rows; ++r)
    detail::triangulate_strip(row_ids[r], row_xs[r], row_ids[r + 1],
                              row_xs[r + 1], TriTag{}, mesh);
  bm.base_vertex_count = mesh.vertex_count();
  bm.base_tri_count = mesh.triangle_count();
  bm.trace_nodes = row_ids[rows];

  // Shared base nodes per tooth, by construction of the top partition.
  std::vector<std::vector<int>> tooth_base_ids(teeth);
  for (int n = 0; n < teeth; ++n)
    tooth_base_ids[n].assign(bm.ref.mesh.vertex_count(), -1);
  for (size_t k = 0; k < top.size(); ++k)
    if (top[k].tooth > 0)
      tooth_base_ids[top[k].tooth - 1][top[k].ref_node] = row_ids[rows][k];
  bm.tooth_base_nodes = tooth_base_ids;

  // Instance the reference mesh per tooth.
  bm.tooth_tri_begin.push_back(mesh.triangle_count());
  for (int n = 0; n < teeth; ++n) {
    const Placement& pl = spec.placements[n];
    std::vector<int> map(bm.ref.mesh.vertex_count(), -1);
    for (int r = 0; r < bm.ref.mesh.vertex_count(); ++r) {
      if (tooth_base_ids[n][r] >= 0) {
        map[r] = tooth_base_ids[n][r];
        continue;
      }
      const Point& q = bm.ref.mesh.vertices[r];
      map[r] = mesh.vertex_count();
      mesh.vertices.push_back({pl.center + pl.length * q.x, q.y});
    }
    for (int t = 0; t < bm.ref.mesh.triangle_count(); ++t) {
      const auto& tr = bm.ref.mesh.triangles[t];
      mesh.triangles.push_back({map[tr[0]], map[tr[1]], map[tr[2]]});
      TriTag tag = bm.ref.mesh.tags[t];
      tag.tooth = n + 1;
      mesh.tags.push_back(tag);
    }
    for (const TaggedEdge& e : bm.ref.mesh.tagged_edges) {
      TaggedEdge m = e;
      m.v0 = map[e.v0];
      m.v1 = map[e.v1];
      if (m.tag == EdgeTag::ToothBase) m.index = n + 1;
      mesh.tagged_edges.push_back(m);
    }
    bm.tooth_nodes.push_back(std::move(map));
    bm.tooth_tri_begin.push_back(mesh.triangle_count());
  }
  return bm;
}

// Base submesh: the brush mesh's base vertices and triangles keep their
// indices, so base fields embed into brush fields by prefix.
struct BaseMesh {
  TriMesh mesh;
  std::vector<int> trace_nodes;  // top-edge nodes, x increasing
  double attach_lo = 0.0, attach_hi = 0.0;

  int trace_count() const { return int(trace_nodes.size()); }
  double trace_x(int k) const { return mesh.vertices[trace_nodes[k]].x; }
};

inline BaseMesh extract_base(const BrushMesh& bm) {
  BaseMesh base;
  base.mesh.vertices.assign(bm.mesh.vertices.begin(),
                            bm.mesh.vertices.begin() + bm.base_vertex_count);
  base.mesh.triangles.assign(bm.mesh.triangles.begin(),
                             bm.mesh.triangles.begin() + bm.base_tri_count);
  base.mesh.tags.assign(bm.mesh.tags.begin(),
                        bm.mesh.tags.begin() + bm.base_tri_count);
  base.trace_nodes = bm.trace_nodes;
  base.attach_lo = bm.spec.attach_lo;
  base.attach_hi = bm.spec.attach_hi;
  return base;
}

// Connectivity helpers used by the graph decomposition and sanity tests.
inline std::map<std::pair<int, int>, std::vector<int>> edge_to_triangles(
    const TriMesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> adj;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tr[e], b = tr[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      adj[{a, b}].push_back(t);
    }
  }
  return adj;
}

inline int euler_characteristic(const TriMesh& mesh) {
  auto adj = edge_to_triangles(mesh);
  return mesh.vertex_count() - int(adj.size()) + mesh.triangle_count();
}

inline bool mesh_is_connected(const TriMesh& mesh) {
  if (mesh.triangle_count() == 0) return false;
  auto adj = edge_to_triangles(mesh);
  std::vector<int> seen(mesh.triangle_count(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    const auto& tr = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tr[e], b = tr[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      for (int s : adj[{a, b}])
        if (!seen[s]) {
          seen[s] = 1;
          ++count;
          stack.push_back(s);
        }
    }
  }
  return count == mesh.triangle_count();
}

}  // namespace brush
