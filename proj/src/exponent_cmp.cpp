// exponent_cmp.cpp - EC+LUT exponent comparator.

#include "fpmac/exponent_cmp.hpp"

#include <cassert>
#include <cstdlib>

namespace fpmac {

ExponentComparator::ExponentComparator(int e_lo, int e_hi) : lo_(e_lo), hi_(e_hi) {
  assert(e_lo <= e_hi);
  const int span = e_hi - e_lo;
  lut_.resize(static_cast<size_t>(2 * span + 1));
  for (int d = -span; d <= span; ++d) {
    Entry& e = lut_[static_cast<size_t>(d + span)];
    e.ref_is_product = d >= 0 ? 1 : 0;
    e.shift = static_cast<uint16_t>(d >= 0 ? d : -d);
  }
}

ExponentComparator ExponentComparator::for_format(const FormatSpec& spec) {
  return ExponentComparator(2 * spec.e_min(), 2 * spec.e_max());
}

ExpCompareResult ExponentComparator::compare_align(int e_p, int e_c) const {
  const int span = hi_ - lo_;
  int d = e_p - e_c;
  if (d > span) d = span;  // out-of-contract inputs clamp to the table edge
  if (d < -span) d = -span;
  const Entry& e = lut_[static_cast<size_t>(d + span)];
  ExpCompareResult r;
  r.e_ref = e.ref_is_product ? e_p : e_c;
  r.shift_p = e.ref_is_product ? 0u : e.shift;
  r.shift_c = e.ref_is_product ? e.shift : 0u;
  return r;
}

const ExponentComparator& comparator_for(const FormatSpec& spec) {
  static const ExponentComparator e4m3 = ExponentComparator::for_format(format_spec(Format::E4M3));
  static const ExponentComparator e5m2 = ExponentComparator::for_format(format_spec(Format::E5M2));
  static const ExponentComparator e2m1 = ExponentComparator::for_format(format_spec(Format::E2M1));
  static const ExponentComparator e1m2 = ExponentComparator::for_format(format_spec(Format::E1M2));
  switch (spec.name) {
    case Format::E4M3: return e4m3;
    case Format::E5M2: return e5m2;
    case Format::E2M1: return e2m1;
    case Format::E1M2: return e1m2;
  }
  std::abort();
}

}  // namespace fpmac
