#pragma once
// Three-input exponent comparison via parallel difference blocks and a
// single shared lookup stage: one subtract plus one table read yields the
// reference (maximum) exponent and both alignment shift amounts.

#include <cstdint>
#include <vector>

#include "fpmac/formats.hpp"

namespace fpmac {

struct ExpCompareResult {
  int e_ref = 0;         // max(e_p, e_c)
  unsigned shift_p = 0;  // right-shift for the product significand
  unsigned shift_c = 0;  // right-shift for the addend significand
};

// Product exponent of two unbiased operand exponents. The bias terms cancel
// at decode, so this is a plain sum.
inline int product_exponent(int ea, int eb) { return ea + eb; }

// The LUT is synthesized at construction from the exponent range; each
// query is fixed-latency: difference -> table entry -> select + shift.
class ExponentComparator {
 public:
  // Inclusive range of exponents the comparator accepts.
  ExponentComparator(int e_lo, int e_hi);

  // Range covering a format's product exponents (sums of two operand
  // exponents) and its addend exponents.
  static ExponentComparator for_format(const FormatSpec& spec);

  // Equals the naive max/subtract formulation for every in-range pair.
  ExpCompareResult compare_align(int e_p, int e_c) const;

  int lo() const { return lo_; }
  int hi() const { return hi_; }

 private:
  struct Entry {
    uint8_t ref_is_product;
    uint16_t shift;
  };
  int lo_;
  int hi_;
  std::vector<Entry> lut_;  // indexed by (e_p - e_c) + span
};

// Immutable shared comparator instance for a format.
const ExponentComparator& comparator_for(const FormatSpec& spec);

}  // namespace fpmac
