#include <doctest.h>

#include <random>

#include "brush/direct.hpp"
#include "brush/unfold.hpp"
#include "oracles.hpp"

using namespace brush;

namespace {

BrushMesh four_teeth_brush() {
  BrushSpec spec = place_periodic({0.0, 1.0, -1.0, 0.0}, 0.0, 1.0, 0.25, 0.5,
                                  cylinder_tooth());
  return mesh_brush(spec, 0.125, 0.25);
}

DiscreteField random_field(const TriMesh& mesh, unsigned seed) {
  std::mt19937 gen = oracle::rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DiscreteField u(mesh);
  for (double& v : u.values) v = dist(gen);
  return u;
}

}  // namespace

TEST_CASE("unfolding a constant gives the constant on every block") {
  BrushMesh bm = four_teeth_brush();
  DiscreteField u(bm.mesh);
  for (double& v : u.values) v = 3.25;
  UnfoldedField uf = unfold(bm, u);
  for (const auto& block : uf.blocks)
    for (double v : block) CHECK(v == 3.25);
}

TEST_CASE("unfolding rejects fields from a different mesh") {
  BrushMesh bm = four_teeth_brush();
  TriMesh other;
  other.vertices = {{0, 0}, {1, 0}, {0, 1}};
  other.triangles = {{0, 1, 2}};
  other.tags.resize(1);
  DiscreteField u(other);
  CHECK_THROWS_AS(unfold(bm, u), StructureError);
}

TEST_CASE("unfolded L2 norms equal the physical ones, globally and per tooth") {
  BrushMesh bm = four_teeth_brush();
  for (unsigned seed = 0; seed < 20; ++seed) {
    DiscreteField u = random_field(bm.mesh, 100 + seed);
    UnfoldedField uf = unfold(bm, u);
    double wnorm = l2_sq_unfolded(uf);
    double pnorm = l2_sq_teeth(bm, u);
    CHECK(std::abs(wnorm - pnorm) <=
          1e-12 * std::max(1.0, std::abs(pnorm)));
    for (int n = 0; n < bm.tooth_count(); ++n) {
      double wn = l2_sq_unfolded_tooth(uf, n);
      double pn = l2_sq_teeth(bm, u, n + 1);
      CHECK(std::abs(wn - pn) <= 1e-12 * std::max(1.0, std::abs(pn)));
    }
  }
}

TEST_CASE("unfolding commutes with derivatives, elementwise") {
  BrushMesh bm = four_teeth_brush();
  for (unsigned seed = 0; seed < 20; ++seed) {
    DiscreteField u = random_field(bm.mesh, 200 + seed);
    UnfoldedDerivatives d = unfold_derivatives(bm, u);
    for (int n = 0; n < bm.tooth_count(); ++n) {
      double l = bm.spec.placements[n].length;
      for (size_t t = 0; t < d.dy[n].size(); ++t) {
        CHECK(std::abs(d.dy[n][t] - d.relabeled_dy[n][t]) <= 1e-13 *
              std::max(1.0, std::abs(d.relabeled_dy[n][t])));
        CHECK(std::abs(d.dxi[n][t] - l * d.relabeled_dx[n][t]) <= 1e-13 *
              std::max(1.0, std::abs(l * d.relabeled_dx[n][t])));
      }
    }
  }
}

TEST_CASE("a field linear in y unfolds to constant vertical derivative") {
  BrushMesh bm = four_teeth_brush();
  DiscreteField u(bm.mesh);
  for (size_t i = 0; i < u.values.size(); ++i)
    u.values[i] = 2.0 * bm.mesh.vertices[i].y - 1.0;
  UnfoldedDerivatives d = unfold_derivatives(bm, u);
  for (int n = 0; n < bm.tooth_count(); ++n)
    for (double v : d.dy[n]) CHECK(v == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("horizontal unfolded gradient is epsilon-small") {
  BrushMesh bm = four_teeth_brush();
  DirectSolution sol = solve_direct(bm, Expr::parse("1 + y + sin(2*x)"));
  UnfoldedDerivatives d = unfold_derivatives(bm, sol.u);
  // |d_xi tau(u)|_{L2(W)} <= C_scale * eps * |d_x u|_{L2(teeth)}
  const TriMesh& ref = bm.ref.mesh;
  double xi_sq = 0.0, dx_sq = 0.0;
  for (int n = 0; n < bm.tooth_count(); ++n) {
    double measure = bm.spec.placements[n].length;
    for (int t = 0; t < ref.triangle_count(); ++t) {
      xi_sq += measure * ref.tri_area(t) * d.dxi[n][t] * d.dxi[n][t];
      dx_sq += measure * ref.tri_area(t) * d.relabeled_dx[n][t] *
               d.relabeled_dx[n][t];
    }
  }
  double bound = bm.spec.c_scale * bm.spec.epsilon;
  CHECK(std::sqrt(xi_sq) <= bound * std::sqrt(dx_sq) + 1e-14);
}

TEST_CASE("unfolding is linear and multiplicative at the nodes") {
  BrushMesh bm = four_teeth_brush();
  DiscreteField u = random_field(bm.mesh, 301);
  DiscreteField v = random_field(bm.mesh, 302);
  UnfoldedField fu = unfold(bm, u), fv = unfold(bm, v);

  DiscreteField lin(bm.mesh);
  for (size_t i = 0; i < lin.values.size(); ++i)
    lin.values[i] = 2.0 * u.values[i] - 3.0 * v.values[i];
  UnfoldedField fl = unfold(bm, lin);
  DiscreteField prod(bm.mesh);
  for (size_t i = 0; i < prod.values.size(); ++i)
    prod.values[i] = u.values[i] * v.values[i];
  UnfoldedField fp = unfold(bm, prod);

  for (int n = 0; n < bm.tooth_count(); ++n)
    for (size_t r = 0; r < fl.blocks[n].size(); ++r) {
      CHECK(fl.blocks[n][r] == 2.0 * fu.blocks[n][r] - 3.0 * fv.blocks[n][r]);
      CHECK(fp.blocks[n][r] == fu.blocks[n][r] * fv.blocks[n][r]);
    }
}

TEST_CASE("unfolding preserves integrals") {
  BrushMesh bm = four_teeth_brush();
  for (unsigned seed = 0; seed < 5; ++seed) {
    DiscreteField u = random_field(bm.mesh, 400 + seed);
    UnfoldedField uf = unfold(bm, u);
    double a = integral_unfolded(uf);
    double b = integral_teeth(bm, u);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("trace compatibility is exact, and detects a broken gluing") {
  BrushMesh bm = four_teeth_brush();
  DiscreteField u = random_field(bm.mesh, 500);
  CHECK(trace_compat(bm, u) == 0.0);

  DirectSolution sol = solve_direct(bm, Expr::parse("1 + y"));
  CHECK(trace_compat(bm, sol.u) == 0.0);

  // Negative control: duplicate the glued nodes of tooth 1.
  BrushMesh broken = bm;
  DiscreteField v(broken.mesh);
  v.values = u.values;
  for (int r : broken.ref.base_nodes) {
    int old = broken.tooth_nodes[0][r];
    broken.tooth_nodes[0][r] = int(v.values.size());
    v.values.push_back(u.values[old] + 0.5);
    broken.mesh.vertices.push_back(bm.mesh.vertices[old]);
  }
  v.mesh = &broken.mesh;
  CHECK(trace_compat(broken, v) > 0.4);
}

TEST_CASE("unfolding gap of a source: constants vanish") {
  BrushMesh bm = four_teeth_brush();
  CHECK(f_unfold_gap(bm, Expr(7.0)) == 0.0);
}

TEST_CASE("unfolding gap decays quadratically for f = x") {
  Expr f = Expr::x();
  double prev = -1.0;
  for (double eps : {0.25, 0.125, 0.0625}) {
    BrushSpec spec = place_periodic({0.0, 1.0, -1.0, 0.0}, 0.0, 1.0, eps, 0.5,
                                    cylinder_tooth());
    BrushMesh bm = mesh_brush(spec, 0.25, 0.25);
    double gap = f_unfold_gap(bm, f);
    if (prev >= 0.0) CHECK(gap <= 0.5 * prev);
    prev = gap;
  }
}

TEST_CASE("unfolding gap decreases for an oscillatory source") {
  Expr f = Expr::parse("sin(3*x)*cos(y)");
  double prev = 1e300;
  for (double eps : {0.125, 0.0625, 0.03125, 0.015625}) {
    BrushSpec spec = place_periodic({0.0, 1.0, -1.0, 0.0}, 0.0, 1.0, eps, 0.5,
                                    cylinder_tooth());
    BrushMesh bm = mesh_brush(spec, 0.25, 0.25);
    double gap = f_unfold_gap(bm, f);
    CHECK(gap < prev);
    prev = gap;
  }
}
