#include <doctest.h>

#include <set>

#include "brush/mesh.hpp"

using namespace brush;

namespace {
Rect unit_base() { return {0.0, 1.0, -1.0, 0.0}; }

BrushSpec four_teeth() {
  return place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
}
}  // namespace

TEST_CASE("cylinder reference mesh is the structured pattern") {
  ToothMesh tm = mesh_tooth_reference(cylinder_tooth(), 0.25);
  CHECK(tm.mesh.triangle_count() == 32);
  for (int t = 0; t < tm.mesh.triangle_count(); ++t)
    CHECK(tm.mesh.tri_area(t) == doctest::Approx(1.0 / 32).epsilon(1e-12));
  CHECK(tm.mesh.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tm.base_nodes.size() == 5);
}

TEST_CASE("branching cell mesh respects the slab pieces") {
  ToothMesh tm = mesh_tooth_reference(branching_tooth(), 0.125);
  const SlabStructure& sl = tm.slabs;
  REQUIRE(sl.levels == std::vector<double>{0.0, 1.0, 2.0, 3.0});
  for (int t = 0; t < tm.mesh.triangle_count(); ++t) {
    const TriTag& tag = tm.mesh.tags[t];
    REQUIRE(tag.slab >= 1);
    const Trapezoid& tr = sl.piece(tag.slab, tag.comp);
    for (int vid : tm.mesh.triangles[t]) {
      const Point& p = tm.mesh.vertices[vid];
      CHECK(p.y >= tr.y_bot - 1e-12);
      CHECK(p.y <= tr.y_top + 1e-12);
      double yc = std::clamp(p.y, tr.y_bot, tr.y_top);
      CHECK(p.x >= tr.left_at(yc) - 1e-12);
      CHECK(p.x <= tr.right_at(yc) + 1e-12);
    }
  }
  double area = polygon_signed_area(branching_tooth().polygon);
  CHECK(tm.mesh.total_area() == doctest::Approx(area).epsilon(1e-13));
}

TEST_CASE("degenerate mesh sizes are rejected") {
  CHECK_THROWS_AS(mesh_tooth_reference(cylinder_tooth(), 0.0), MeshError);
  ModelTooth t = cylinder_tooth();
  t.delta0 = 0.1;
  CHECK_THROWS_AS(mesh_tooth_reference(t, 0.25), MeshError);
}

TEST_CASE("brush mesh: tags, connectivity, conerved area") {
  BrushSpec spec = four_teeth();
  BrushMesh bm = mesh_brush(spec, 0.125, 0.25);

  std::set<int> teeth_seen;
  for (const TriTag& tag : bm.mesh.tags)
    if (tag.tooth > 0) teeth_seen.insert(tag.tooth);
  CHECK(teeth_seen == std::set<int>{1, 2, 3, 4});

  CHECK(mesh_is_connected(bm.mesh));
  CHECK(euler_characteristic(bm.mesh) == 1);

  double cell_area = polygon_signed_area(spec.tooth.polygon);
  double expect = spec.base.area();
  for (const Placement& p : spec.placements)
    expect += p.length * cell_area;
  CHECK(bm.mesh.total_area() == doctest::Approx(expect).epsilon(1e-12));

  // No triangle has negative or tiny area.
  for (int t = 0; t < bm.mesh.triangle_count(); ++t)
    CHECK(bm.mesh.tri_area(t) > 1e-12);
}

TEST_CASE("affine instancing scales every triangle area by the tooth length") {
  BrushSpec spec = four_teeth();
  BrushMesh bm = mesh_brush(spec, 0.125, 0.25);
  int rt = bm.ref.mesh.triangle_count();
  for (int n = 0; n < bm.tooth_count(); ++n) {
    double l = spec.placements[n].length;
    for (int t = 0; t < rt; ++t) {
      double got = bm.mesh.tri_area(bm.tooth_tri_begin[n] + t);
      double want = l * bm.ref.mesh.tri_area(t);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("tooth bases glue node-to-node onto the base top edge") {
  BrushSpec spec = four_teeth();
  BrushMesh bm = mesh_brush(spec, 0.125, 0.25);
  auto adjacency = edge_to_triangles(bm.mesh);
  int base_edges_checked = 0;
  for (const TaggedEdge& e : bm.mesh.tagged_edges) {
    if (e.tag != EdgeTag::ToothBase || e.index == 0) continue;
    int a = e.v0, b = e.v1;
    if (a > b) std::swap(a, b);
    const auto& tris = adjacency.at({a, b});
    REQUIRE(tris.size() == 2);
    int kinds[2] = {bm.mesh.tags[tris[0]].tooth, bm.mesh.tags[tris[1]].tooth};
    CHECK(((kinds[0] == 0) != (kinds[1] == 0)));
    ++base_edges_checked;
  }
  CHECK(base_edges_checked > 0);
  // Every shared node is bitwise identical between the two maps.
  for (int n = 0; n < bm.tooth_count(); ++n)
    for (int r : bm.ref.base_nodes)
      CHECK(bm.tooth_nodes[n][r] == bm.tooth_base_nodes[n][r]);
}

TEST_CASE("horizontal shrink never widens a triangle's width/height ratio") {
  BrushSpec spec =
      place_single(unit_base(), 0.0, 1.0, 1.0 / 64, cylinder_tooth());
  BrushMesh bm = mesh_brush(spec, 0.125, 0.25);
  auto ratio = [](const TriMesh& m, int t) {
    const auto& tr = m.triangles[t];
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int v : tr) {
      xmin = std::min(xmin, m.vertices[v].x);
      xmax = std::max(xmax, m.vertices[v].x);
      ymin = std::min(ymin, m.vertices[v].y);
      ymax = std::max(ymax, m.vertices[v].y);
    }
    return (xmax - xmin) / (ymax - ymin);
  };
  for (int t = 0; t < bm.ref.mesh.triangle_count(); ++t)
    CHECK(ratio(bm.mesh, bm.tooth_tri_begin[0] + t) <=
          ratio(bm.ref.mesh, t) + 1e-14);
}

TEST_CASE("every slab level line is made of mesh edges") {
  ToothMesh tm = mesh_tooth_reference(tee_tooth(), 0.25);
  // No triangle straddles a level: min and max vertex y lie in one slab.
  for (int t = 0; t < tm.mesh.triangle_count(); ++t) {
    double ymin = 1e300, ymax = -1e300;
    for (int v : tm.mesh.triangles[t]) {
      ymin = std::min(ymin, tm.mesh.vertices[v].y);
      ymax = std::max(ymax, tm.mesh.vertices[v].y);
    }
    int slab = tm.mesh.tags[t].slab;
    CHECK(ymin >= tm.slabs.levels[slab - 1] - 1e-14);
    CHECK(ymax <= tm.slabs.levels[slab] + 1e-14);
  }
}
