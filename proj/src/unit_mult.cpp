// unit_mult.cpp - masked partial-product array of the unit multiplier.

#include "fpmac/unit_mult.hpp"

namespace fpmac {

PartialProductMask PartialProductMask::for_mode(MulMode m) {
  PartialProductMask pp;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool same_half = (i < 2) == (j < 2);
      pp.delta[i][j] = (m == MulMode::Full4x4 || same_half) ? 1 : 0;
    }
  }
  return pp;
}

uint8_t unit_multiply(uint8_t a, uint8_t b, MulMode mode) {
  const PartialProductMask pp = PartialProductMask::for_mode(mode);
  unsigned acc = 0;
  for (int i = 0; i < 4; ++i) {
    const unsigned ai = (a >> i) & 1u;
    for (int j = 0; j < 4; ++j) {
      const unsigned bj = (b >> j) & 1u;
      if (pp.delta[i][j]) acc += (ai & bj) << (i + j);  // AND term at weight 2^(i+j)
    }
  }
  return static_cast<uint8_t>(acc);  // <= 225 full, <= 0x99 split
}

unsigned masked_ppsum(uint8_t a, uint8_t b, MulMode mode) {
  unsigned total = 0;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const unsigned delta =
          (mode == MulMode::Full4x4 || (i < 2 && j < 2) || (i >= 2 && j >= 2)) ? 1u : 0u;
      total += (delta * (((a >> i) & 1u) * ((b >> j) & 1u))) << (i + j);
    }
  }
  return total;
}

}  // namespace fpmac
