// Model tooth and brush-domain geometry: polygon teeth with horizontal slab
// structure, validation of the standing assumptions, and the placement
// families that distribute scaled teeth along the attachment interval.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace brush {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PlacementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double polygon_signed_area(const std::vector<Point>& poly) {
  double s = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const Point& p, const Point& q, const Point& r) {
  return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
         std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

// Proper or improper intersection of closed segments [p1,p2] and [p3,p4].
inline bool segments_intersect(const Point& p1, const Point& p2,
                               const Point& p3, const Point& p4) {
  double d1 = cross(p3, p4, p1);
  double d2 = cross(p3, p4, p2);
  double d3 = cross(p1, p2, p3);
  double d4 = cross(p1, p2, p4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(p3, p1, p4)) return true;
  if (d2 == 0 && on_segment(p3, p2, p4)) return true;
  if (d3 == 0 && on_segment(p1, p3, p2)) return true;
  if (d4 == 0 && on_segment(p1, p4, p2)) return true;
  return false;
}

}  // namespace detail

// O(n^2) simplicity test; tooth polygons are small.
inline bool polygon_is_simple(const std::vector<Point>& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Point& a1 = poly[i];
    const Point& a2 = poly[(i + 1) % n];
    if (a1.x == a2.x && a1.y == a2.y) return false;  // zero-length edge
    for (size_t j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (detail::segments_intersect(a1, a2, poly[j], poly[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

// Reference tooth cell: a simple polygon in the strip 0 < y < height whose
// boundary meets {y = 0} exactly in the closed base interval
// [base_lo, base_hi].
struct ModelTooth {
  std::vector<Point> polygon;  // simple, counterclockwise
  double base_lo = 0.0;        // tooth base interval
  double base_hi = 0.0;
  double height = 0.0;  // top of the enclosing strip
  double r1 = 0.0;      // horizontal half-extent bound, |xi| <= r1
  double delta0 = 0.0;  // collar height: base x (0, delta0) inside the polygon
  std::vector<double> slab_levels;  // optional; filled by the decomposition
};

// One horizontal slab piece of a tooth polygon. Because the slab levels
// contain every vertex y-coordinate, each connected piece inside a slab is a
// trapezoid with straight lateral sides; its section width is linear in y.
struct Trapezoid {
  int slab = 0;  // 1-based slab index: vertical extent (level[slab-1], level[slab])
  int comp = 0;  // 1-based rank among the slab's pieces, left to right
  double y_bot = 0.0, y_top = 0.0;
  double xl_bot = 0.0, xr_bot = 0.0;
  double xl_top = 0.0, xr_top = 0.0;

  double left_at(double y) const {
    double t = (y - y_bot) / (y_top - y_bot);
    return xl_bot + t * (xl_top - xl_bot);
  }
  double right_at(double y) const {
    double t = (y - y_bot) / (y_top - y_bot);
    return xr_bot + t * (xr_top - xr_bot);
  }
  double width_bot() const { return xr_bot - xl_bot; }
  double width_top() const { return xr_top - xl_top; }
};

struct SlabStructure {
  std::vector<double> levels;       // all vertex y-coordinates, increasing
  std::vector<Trapezoid> pieces;    // grouped by slab, left to right
  std::vector<int> slab_begin;      // pieces of slab i: [slab_begin[i-1], slab_begin[i])
  int slab_count() const { return int(slab_begin.size()) - 1; }
  int pieces_in_slab(int slab) const {
    return slab_begin[slab] - slab_begin[slab - 1];
  }
  const Trapezoid& piece(int slab, int comp) const {
    return pieces[slab_begin[slab - 1] + comp - 1];
  }
};

// Decomposes a simple polygon into per-slab trapezoids. Slab levels are the
// distinct vertex y-coordinates, so no vertex lies strictly inside a slab and
// every lateral boundary inside a slab is a single polygon edge.
inline SlabStructure slab_structure(const std::vector<Point>& poly) {
  SlabStructure s;
  for (const Point& p : poly) s.levels.push_back(p.y);
  std::sort(s.levels.begin(), s.levels.end());
  s.levels.erase(std::unique(s.levels.begin(), s.levels.end()),
                 s.levels.end());
  if (s.levels.size() < 2)
    throw GeometryError("polygon degenerates to a horizontal line");

  const size_t n = poly.size();
  s.slab_begin.push_back(0);
  for (size_t li = 0; li + 1 < s.levels.size(); ++li) {
    double ya = s.levels[li];
    double yb = s.levels[li + 1];
    struct Crossing {
      double x_bot, x_top, x_mid;
    };
    std::vector<Crossing> cr;
    for (size_t i = 0; i < n; ++i) {
      const Point& p = poly[i];
      const Point& q = poly[(i + 1) % n];
      if (p.y == q.y) continue;  // horizontal edge, never crosses a slab
      double ylo = std::min(p.y, q.y), yhi = std::max(p.y, q.y);
      if (ylo > ya || yhi < yb) continue;  // does not span this slab
      auto x_at = [&](double y) {
        if (p.y == y) return p.x;  // keep endpoint coordinates exact
        if (q.y == y) return q.x;
        return p.x + (q.x - p.x) * (y - p.y) / (q.y - p.y);
      };
      cr.push_back({x_at(ya), x_at(yb), 0.5 * (x_at(ya) + x_at(yb))});
    }
    if (cr.size() < 2 || cr.size() % 2 != 0)
      throw GeometryError("inconsistent slab crossing count at level y=" +
                          std::to_string(ya));
    std::sort(cr.begin(), cr.end(),
              [](const Crossing& a, const Crossing& b) {
                return a.x_mid < b.x_mid;
              });
    for (size_t m = 0; m + 1 < cr.size(); m += 2) {
      Trapezoid t;
      t.slab = int(li) + 1;
      t.comp = int(m / 2) + 1;
      t.y_bot = ya;
      t.y_top = yb;
      t.xl_bot = cr[m].x_bot;
      t.xr_bot = cr[m + 1].x_bot;
      t.xl_top = cr[m].x_top;
      t.xr_top = cr[m + 1].x_top;
      s.pieces.push_back(t);
    }
    s.slab_begin.push_back(int(s.pieces.size()));
  }
  return s;
}

struct ValidationReport {
  bool ok = true;
  std::string violation;  // names the first violated assumption
};

// Checks the standing assumptions on a model tooth: unit base measure,
// containment in the (-r1, r1) x (0, height) strip, boundary meeting {y=0}
// exactly in the closed base interval, 0 inside the base, and the collar
// base x (0, delta0) inside the polygon. Throws on a non-simple polygon.
inline ValidationReport validate_tooth(const ModelTooth& t) {
  if (t.polygon.size() < 3 || !polygon_is_simple(t.polygon))
    throw GeometryError("tooth polygon is not a simple closed polygon");
  auto fail = [](std::string why) {
    return ValidationReport{false, std::move(why)};
  };
  if (polygon_signed_area(t.polygon) <= 0.0)
    return fail("polygon is not counterclockwise oriented");
  if (!(t.height > 0.0) || !(t.r1 > 0.0) || !(t.delta0 > 0.0))
    return fail("height, R1 and delta0 must be positive");

  if (std::abs((t.base_hi - t.base_lo) - 1.0) > 1e-12)
    return fail("|omega| != 1");
  if (!(t.base_lo < 0.0 && 0.0 < t.base_hi)) return fail("0 not inside omega");

  for (const Point& p : t.polygon) {
    if (p.y < 0.0 || p.y > t.height)
      return fail("polygon leaves the strip 0 <= y <= height");
    if (std::abs(p.x) > t.r1) return fail("polygon leaves |xi| <= R1");
  }

  // Boundary trace on {y=0}: exactly the closed base interval.
  double lo = 0.0, hi = 0.0;
  int base_edges = 0;
  const size_t n = t.polygon.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = t.polygon[i];
    const Point& b = t.polygon[(i + 1) % n];
    if (a.y == 0.0 && b.y == 0.0) {
      double l = std::min(a.x, b.x), h = std::max(a.x, b.x);
      if (base_edges == 0) {
        lo = l;
        hi = h;
      } else {
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
      ++base_edges;
    }
  }
  if (base_edges == 0) return fail("polygon has no edge on {y=0}");
  // Base edges must form one contiguous run and no stray vertex may touch y=0.
  double covered = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Point& a = t.polygon[i];
    const Point& b = t.polygon[(i + 1) % n];
    if (a.y == 0.0 && b.y == 0.0) covered += std::abs(b.x - a.x);
    if ((a.y == 0.0) != (b.y == 0.0)) {
      const Point& v = a.y == 0.0 ? a : b;
      if (v.x != lo && v.x != hi)
        return fail("boundary touches {y=0} outside the base interval");
    }
  }
  if (std::abs(covered - (hi - lo)) > 1e-12)
    return fail("base trace on {y=0} is not a single interval");
  if (std::abs(lo - t.base_lo) > 1e-12 || std::abs(hi - t.base_hi) > 1e-12)
    return fail("declared omega does not match the polygon base");

  // Collar: omega x (0, delta0) inside the polygon. With linear slab bounds
  // it is enough to check section containment at clipped slab endpoints.
  SlabStructure s = slab_structure(t.polygon);
  if (t.delta0 > t.height) return fail("delta0 exceeds the tooth height");
  for (int slab = 1; slab <= s.slab_count(); ++slab) {
    double ya = s.levels[slab - 1];
    double yb = s.levels[slab];
    if (ya >= t.delta0) break;
    double yc = std::min(yb, t.delta0);
    bool covered_slab = false;
    for (int c = 1; c <= s.pieces_in_slab(slab); ++c) {
      const Trapezoid& tr = s.piece(slab, c);
      if (tr.left_at(ya) <= t.base_lo + 1e-14 &&
          tr.right_at(ya) >= t.base_hi - 1e-14 &&
          tr.left_at(yc) <= t.base_lo + 1e-14 &&
          tr.right_at(yc) >= t.base_hi - 1e-14) {
        covered_slab = true;
        break;
      }
    }
    if (!covered_slab) return fail("collar omega x (0, delta0) not inside Y");
  }
  return {};
}

inline void require_valid_tooth(const ModelTooth& t) {
  ValidationReport r = validate_tooth(t);
  if (!r.ok) throw GeometryError("invalid tooth: " + r.violation);
}

// Axis-aligned brush base rectangle [x0,x1] x [y0,0].
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

struct Placement {
  double center = 0.0;  // tooth base point on the attachment interval
  double length = 0.0;  // horizontal scale factor of this tooth
};

// A brush domain: base rectangle, attachment interval on its top side, and
// scaled copies of one model tooth placed along it.
struct BrushSpec {
  Rect base;
  double attach_lo = 0.0;  // attachment interval inside (base.x0, base.x1)
  double attach_hi = 0.0;
  ModelTooth tooth;
  std::vector<Placement> placements;  // sorted by center
  double epsilon = 0.0;
  double c_scale = 0.0;  // max_n length_n / epsilon

  double tooth_base_lo(int n) const {
    return placements[n].center + placements[n].length * tooth.base_lo;
  }
  double tooth_base_hi(int n) const {
    return placements[n].center + placements[n].length * tooth.base_hi;
  }
  double covered_length() const {
    double s = 0.0;
    for (const Placement& p : placements)
      s += p.length * (tooth.base_hi - tooth.base_lo);
    return s;
  }
};

// Shared invariants for every placement family: scaled bases strictly inside
// the attachment interval, open guard intervals (center +- R1*length) pairwise
// disjoint (touching closures rejected), and lengths in (0, C*eps].
inline void validate_spec(const BrushSpec& spec) {
  if (!(spec.base.y1 == 0.0) || !(spec.base.y0 < 0.0))
    throw GeometryError("base rectangle must be [x0,x1] x [y0, 0] with y0 < 0");
  if (!(spec.attach_lo < spec.attach_hi) || spec.attach_lo < spec.base.x0 ||
      spec.attach_hi > spec.base.x1)
    throw GeometryError("attachment interval leaves the base top side");
  if (spec.placements.empty()) throw PlacementError("no teeth placed");
  for (size_t i = 0; i < spec.placements.size(); ++i) {
    const Placement& p = spec.placements[i];
    if (!(p.length > 0.0))
      throw PlacementError("tooth length must be positive");
    if (p.length > spec.c_scale * spec.epsilon + 1e-14)
      throw PlacementError("tooth length exceeds C*epsilon");
    double lo = p.center + p.length * spec.tooth.base_lo;
    double hi = p.center + p.length * spec.tooth.base_hi;
    if (!(spec.attach_lo < lo && hi < spec.attach_hi))
      throw PlacementError(
          "tooth base not strictly inside the attachment interval");
    if (i + 1 < spec.placements.size()) {
      const Placement& q = spec.placements[i + 1];
      double guard_hi = p.center + spec.tooth.r1 * p.length;
      double guard_lo = q.center - spec.tooth.r1 * q.length;
      if (!(guard_hi < guard_lo))
        throw PlacementError("tooth guard intervals touch or overlap");
    }
  }
}

// Equispaced teeth: one tooth of length fill*eps centered in each eps-cell of
// the attachment interval. The base indicator averages to the constant fill.
inline BrushSpec place_periodic(const Rect& base, double attach_lo,
                                double attach_hi, double eps, double fill,
                                const ModelTooth& tooth) {
  require_valid_tooth(tooth);
  if (!(eps > 0.0) || !(fill > 0.0) || fill > 1.0)
    throw PlacementError("need eps > 0 and fill in (0, 1]");
  BrushSpec spec;
  spec.base = base;
  spec.attach_lo = attach_lo;
  spec.attach_hi = attach_hi;
  spec.tooth = tooth;
  spec.epsilon = eps;
  int count = int(std::floor((attach_hi - attach_lo) / eps + 1e-12));
  if (count < 1) throw PlacementError("attachment interval shorter than eps");
  for (int n = 0; n < count; ++n)
    spec.placements.push_back({attach_lo + (n + 0.5) * eps, fill * eps});
  spec.c_scale = fill;
  validate_spec(spec);
  return spec;
}

// Equal-width teeth whose spacing widens to the right so the covered fraction
// tends to (1-x)/2 on the attachment interval (0,1): tooth n is centered where
// the cumulative target mass x(2-x)/4 reaches (n-1/2) times the tooth width.
// Consecutive gaps grow close to linearly near the left end.
inline BrushSpec place_linear_gaps(const Rect& base, double eps,
                                   const ModelTooth& tooth) {
  require_valid_tooth(tooth);
  if (!(eps > 0.0)) throw PlacementError("need eps > 0");
  BrushSpec spec;
  spec.base = base;
  spec.attach_lo = 0.0;
  spec.attach_hi = 1.0;
  spec.tooth = tooth;
  spec.epsilon = eps;
  double width = 0.5 * eps;
  int count = int(std::llround(1.0 / (2.0 * eps)));
  if (count < 2) throw PlacementError("fewer than 2 teeth fit");
  for (int n = 1; n <= count; ++n) {
    double mass = (n - 0.5) * width;  // of total 1/4
    double center = 1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * mass));
    spec.placements.push_back({center, width});
  }
  spec.c_scale = 0.5;
  validate_spec(spec);
  return spec;
}

// One tooth of length eps centered on the attachment interval; its base
// indicator vanishes in the limit.
inline BrushSpec place_single(const Rect& base, double attach_lo,
                              double attach_hi, double eps,
                              const ModelTooth& tooth) {
  require_valid_tooth(tooth);
  if (!(eps > 0.0)) throw PlacementError("need eps > 0");
  BrushSpec spec;
  spec.base = base;
  spec.attach_lo = attach_lo;
  spec.attach_hi = attach_hi;
  spec.tooth = tooth;
  spec.epsilon = eps;
  spec.placements.push_back({0.5 * (attach_lo + attach_hi), eps});
  spec.c_scale = 1.0;
  validate_spec(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Shipped teeth

// Unit-square tooth: base (-1/2, 1/2), height 1, constant section width 1.
inline ModelTooth cylinder_tooth(double height = 1.0) {
  ModelTooth t;
  t.polygon = {{-0.5, 0.0}, {0.5, 0.0}, {0.5, height}, {-0.5, height}};
  t.base_lo = -0.5;
  t.base_hi = 0.5;
  t.height = height;
  t.r1 = 0.5;
  t.delta0 = height;
  return t;
}

// Three-slab tooth with a branching: wide trunk (width 2 on 0<y<1), then a
// constant column (width 1/2) next to a tapering wedge (width (3-y)/2) that
// dead-ends at y=2, then a single column of width 1 up to y=3. Section widths
// per slab: 2, {1/2, (3-y)/2}, 1. The base has length 2, so this cell is for
// graph-decomposition work, not for brush construction.
inline ModelTooth branching_tooth() {
  ModelTooth t;
  t.polygon = {{-1.0, 0.0}, {1.0, 0.0},  {1.0, 2.0},  {0.5, 2.0},
               {0.0, 1.0},  {-0.5, 1.0}, {-0.5, 2.0}, {0.0, 2.0},
               {0.0, 3.0},  {-1.0, 3.0}};
  t.base_lo = -1.0;
  t.base_hi = 1.0;
  t.height = 3.0;
  t.r1 = 1.0;
  t.delta0 = 1.0;
  return t;
}

// The same branching cell scaled horizontally by 1/2 so the base has unit
// length and passes tooth validation.
inline ModelTooth branching_tooth_unit() {
  ModelTooth t = branching_tooth();
  for (Point& p : t.polygon) p.x *= 0.5;
  t.base_lo *= 0.5;
  t.base_hi *= 0.5;
  t.r1 = 0.5;
  return t;
}

// Stem (width 1 on 0<y<1) carrying a wider crossbar (width 2 on 1<y<2).
inline ModelTooth tee_tooth() {
  ModelTooth t;
  t.polygon = {{-0.5, 0.0}, {0.5, 0.0}, {0.5, 1.0},  {1.0, 1.0},
               {1.0, 2.0},  {-1.0, 2.0}, {-1.0, 1.0}, {-0.5, 1.0}};
  t.base_lo = -0.5;
  t.base_hi = 0.5;
  t.height = 2.0;
  t.r1 = 1.0;
  t.delta0 = 1.0;
  return t;
}

}  // namespace brush
