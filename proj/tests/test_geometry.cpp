#include <doctest.h>

#include "brush/geometry.hpp"

using namespace brush;

namespace {
Rect unit_base() { return {0.0, 1.0, -1.0, 0.0}; }
}  // namespace

TEST_CASE("tooth validation accepts the shipped cells") {
  CHECK(validate_tooth(cylinder_tooth()).ok);
  CHECK(validate_tooth(branching_tooth_unit()).ok);
  CHECK(validate_tooth(tee_tooth()).ok);
}

TEST_CASE("tooth validation rejects a base of the wrong measure") {
  ModelTooth t;
  t.polygon = {{-1.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {-1.0, 1.0}};
  t.base_lo = -1.0;
  t.base_hi = 1.0;
  t.height = 1.0;
  t.r1 = 1.0;
  t.delta0 = 1.0;
  ValidationReport r = validate_tooth(t);
  CHECK_FALSE(r.ok);
  CHECK(r.violation == "|omega| != 1");
  // The unnormalized branching cell fails for the same reason but still
  // supports meshing and decomposition.
  CHECK_FALSE(validate_tooth(branching_tooth()).ok);
  CHECK(validate_tooth(branching_tooth()).violation == "|omega| != 1");
}

TEST_CASE("tooth validation flags structural defects") {
  ModelTooth bowtie = cylinder_tooth();
  bowtie.polygon = {{-0.5, 0.0}, {0.5, 1.0}, {0.5, 0.0}, {-0.5, 1.0}};
  CHECK_THROWS_AS(validate_tooth(bowtie), GeometryError);

  ModelTooth shifted = cylinder_tooth();
  for (Point& p : shifted.polygon) p.x += 0.7;
  shifted.base_lo += 0.7;
  shifted.base_hi += 0.7;
  shifted.r1 = 1.5;
  CHECK(validate_tooth(shifted).violation == "0 not inside omega");

  ModelTooth pinched = cylinder_tooth();
  pinched.polygon = {{-0.5, 0.0}, {0.5, 0.0}, {0.25, 1.0}, {-0.25, 1.0}};
  pinched.delta0 = 0.5;
  CHECK(validate_tooth(pinched).violation ==
        "collar omega x (0, delta0) not inside Y");

  ModelTooth tall = cylinder_tooth();
  tall.height = 0.5;  // polygon now sticks out of the strip
  CHECK_FALSE(validate_tooth(tall).ok);
}

TEST_CASE("periodic placement matches the cell construction") {
  BrushSpec s4 =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  REQUIRE(s4.placements.size() == 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(s4.placements[n].center == doctest::Approx((n + 0.5) * 0.25));
    CHECK(s4.placements[n].length == doctest::Approx(0.125));
  }
  CHECK(s4.covered_length() == doctest::Approx(0.5));

  BrushSpec s8 =
      place_periodic(unit_base(), 0.0, 1.0, 0.125, 0.5, cylinder_tooth());
  CHECK(s8.placements.size() == 8);
  CHECK(s8.covered_length() == doctest::Approx(0.5));
}

TEST_CASE("periodic placement rejects touching guard intervals") {
  ModelTooth wide_guard = cylinder_tooth();
  wide_guard.r1 = 1.0;
  CHECK_THROWS_AS(
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 1.0, wide_guard),
      PlacementError);
  // Full fill also collides with the attachment boundary for the plain cell.
  CHECK_THROWS_AS(
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 1.0, cylinder_tooth()),
      PlacementError);
}

TEST_CASE("halving eps doubles the tooth count, covered length stable") {
  for (double eps : {0.25, 0.125, 0.0625}) {
    BrushSpec a =
        place_periodic(unit_base(), 0.0, 1.0, eps, 0.5, cylinder_tooth());
    BrushSpec b =
        place_periodic(unit_base(), 0.0, 1.0, eps / 2, 0.5, cylinder_tooth());
    CHECK(b.placements.size() == 2 * a.placements.size());
    CHECK(std::abs(a.covered_length() - b.covered_length()) <=
          0.5 * eps + 1e-15);
  }
}

TEST_CASE("widening-gap placement is sorted, disjoint and interior") {
  for (double eps : {1.0 / 16, 1.0 / 64, 1.0 / 128}) {
    BrushSpec s = place_linear_gaps(unit_base(), eps, cylinder_tooth());
    CHECK(s.placements.size() >= 2);
    double prev_hi = 0.0;
    for (size_t n = 0; n < s.placements.size(); ++n) {
      double lo = s.tooth_base_lo(int(n));
      double hi = s.tooth_base_hi(int(n));
      CHECK(lo > prev_hi);
      CHECK(hi < 1.0);
      prev_hi = hi;
    }
    // Gaps grow towards the sparse end.
    for (size_t n = 0; n + 2 < s.placements.size(); ++n) {
      double gap1 = s.tooth_base_lo(int(n) + 1) - s.tooth_base_hi(int(n));
      double gap2 = s.tooth_base_lo(int(n) + 2) - s.tooth_base_hi(int(n) + 1);
      CHECK(gap2 > gap1);
    }
  }
  CHECK_THROWS_AS(place_linear_gaps(unit_base(), 0.5, cylinder_tooth()),
                  PlacementError);
}

TEST_CASE("covered length never exceeds the attachment interval") {
  for (double eps : {0.25, 0.0625}) {
    BrushSpec p =
        place_periodic(unit_base(), 0.0, 1.0, eps, 0.75, cylinder_tooth());
    CHECK(p.covered_length() <= 1.0 + 1e-12);
    BrushSpec g = place_linear_gaps(unit_base(), eps, cylinder_tooth());
    CHECK(g.covered_length() <= 1.0 + 1e-12);
    BrushSpec s = place_single(unit_base(), 0.0, 1.0, eps, cylinder_tooth());
    CHECK(s.covered_length() == doctest::Approx(eps));
  }
}
