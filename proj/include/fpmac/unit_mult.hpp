#pragma once
// Reconfigurable 4-bit unit multiplier: one unsigned 4x4 product, or two
// independent unsigned 2x2 products computed from the same partial-product
// array by masking the cross-partition terms.

#include <array>
#include <cstdint>

namespace fpmac {

enum class MulMode : uint8_t {
  Full4x4 = 0,   // all 16 partial products active
  Split2x2 = 1,  // cross-partition terms masked off
};

// Partial-product activation matrix delta(i, j) for the a_i * b_j terms.
// Split mode keeps only (i<2, j<2) and (i>=2, j>=2).
struct PartialProductMask {
  std::array<std::array<uint8_t, 4>, 4> delta{};  // [i][j]
  static PartialProductMask for_mode(MulMode m);
};

// The unit multiplier, modeled as the explicit 16-AND-term array reduced
// under the mode mask (a host multiply is used only as a test oracle).
// Full mode: the 8-bit product a*b. Split mode: bits[7:4] = a[3:2]*b[3:2],
// bits[3:0] = a[1:0]*b[1:0]; each 2x2 product is at most 9 so the nibbles
// never collide.
uint8_t unit_multiply(uint8_t a, uint8_t b, MulMode mode);

// The reference double sum  sum_ij delta_m(i,j) a_i b_j 2^(i+j), kept public
// as the internal cross-check for unit_multiply.
unsigned masked_ppsum(uint8_t a, uint8_t b, MulMode mode);

}  // namespace fpmac
