// Direct solve of -Lap(u) + u = f with natural Neumann conditions on the
// whole brush mesh.
#pragma once

#include "brush/expr.hpp"
#include "brush/fem.hpp"
#include "brush/mesh.hpp"

namespace brush {

struct DirectSolution {
  DiscreteField u;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

inline DirectSolution solve_direct(const BrushMesh& bm, const Expr& f,
                                   double cg_tol = 1e-10,
                                   int max_iter = 200000) {
  SparseSpd A = assemble(bm.mesh);
  std::vector<double> b =
      load(bm.mesh, [&](double x, double y) { return f(x, y); });
  CgResult r = solve_spd(A, b, cg_tol, max_iter);
  DirectSolution sol;
  sol.u = DiscreteField(bm.mesh, std::move(r.x));
  sol.cg_iterations = r.iterations;
  sol.cg_residual = r.relative_residual;
  return sol;
}

}  // namespace brush
