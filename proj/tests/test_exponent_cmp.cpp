#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpmac/exponent_cmp.hpp"

using namespace fpmac;

TEST_CASE("product_exponent") {
  CHECK(product_exponent(0, 0) == 0);
  CHECK(product_exponent(3, -2) == 1);
  // E4M3 max*max stays inside the comparator range
  const ExponentComparator& cmp = comparator_for(format_spec(Format::E4M3));
  CHECK(product_exponent(8, 8) == 16);
  CHECK(16 <= cmp.hi());
  CHECK(2 * format_spec(Format::E4M3).e_min() == cmp.lo());
}

TEST_CASE("compare_align examples") {
  const ExponentComparator& cmp = comparator_for(format_spec(Format::E4M3));

  const ExpCompareResult r1 = cmp.compare_align(3, 1);
  CHECK(r1.e_ref == 3);
  CHECK(r1.shift_p == 0);
  CHECK(r1.shift_c == 2);

  for (int x = -10; x <= 10; ++x) {
    const ExpCompareResult r = cmp.compare_align(x, x);
    CHECK(r.e_ref == x);
    CHECK(r.shift_p == 0);
    CHECK(r.shift_c == 0);
  }

  const ExpCompareResult r2 = cmp.compare_align(-4, 2);
  CHECK(r2.e_ref == 2);
  CHECK(r2.shift_p == 6);
  CHECK(r2.shift_c == 0);
}

TEST_CASE("LUT equals naive max/subtract over the full per-format range") {
  for (Format f : {Format::E4M3, Format::E5M2, Format::E2M1, Format::E1M2}) {
    const ExponentComparator& cmp = comparator_for(format_spec(f));
    for (int ep = cmp.lo(); ep <= cmp.hi(); ++ep) {
      for (int ec = cmp.lo(); ec <= cmp.hi(); ++ec) {
        const ExpCompareResult r = cmp.compare_align(ep, ec);
        const int e_ref = ep >= ec ? ep : ec;
        CHECK(r.e_ref == e_ref);
        CHECK(static_cast<int>(r.shift_p) == e_ref - ep);
        CHECK(static_cast<int>(r.shift_c) == e_ref - ec);
        // exactly one shift is zero (both on ties)
        CHECK((r.shift_p == 0 || r.shift_c == 0));
      }
    }
  }
}

TEST_CASE("antisymmetry: swapping inputs swaps the shift roles") {
  const ExponentComparator& cmp = comparator_for(format_spec(Format::E5M2));
  for (int ep = cmp.lo(); ep <= cmp.hi(); ep += 3) {
    for (int ec = cmp.lo(); ec <= cmp.hi(); ec += 3) {
      const ExpCompareResult a = cmp.compare_align(ep, ec);
      const ExpCompareResult b = cmp.compare_align(ec, ep);
      CHECK(a.e_ref == b.e_ref);
      CHECK(a.shift_p == b.shift_c);
      CHECK(a.shift_c == b.shift_p);
    }
  }
}

TEST_CASE("degenerate single-exponent range (E1M2)") {
  const ExponentComparator& cmp = comparator_for(format_spec(Format::E1M2));
  CHECK(cmp.lo() == 0);
  CHECK(cmp.hi() == 0);
  const ExpCompareResult r = cmp.compare_align(0, 0);
  CHECK(r.e_ref == 0);
  CHECK(r.shift_p == 0);
  CHECK(r.shift_c == 0);
}
