#pragma once
// One-shot functional MAC: a*b + c per lane, staged exactly as the 6-stage
// hardware pipeline computes it (S0 decode, S1 sign/multiply/compare,
// S2 truncating alignment, S3 CSA 3:2 + carry-select add, S4 leading-zero
// normalization with truncation, S5 ReLU + encode). The stage functions are
// shared with the cycle-level pipeline model so the two paths cannot drift.

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "fpmac/exponent_cmp.hpp"
#include "fpmac/formats.hpp"
#include "fpmac/unit_mult.hpp"

namespace fpmac {

// 128-bit words cover the widest accumulator (E5M2 with the full 64 guard
// bits: W = 2*3 + 64 + 2 = 72).
using u128 = unsigned __int128;
using i128 = __int128;

enum class MacMode : uint8_t { E4M3, E5M2, DualE2M1, DualE1M2 };

std::string_view mac_mode_name(MacMode m);
MacMode parse_mac_mode(std::string_view name);  // "e4m3" ... "dual-e1m2"

// Run configuration for one PE instance.
struct MacConfig {
  MacMode mode = MacMode::E4M3;
  unsigned guard_bits = 3;  // extra low-order accumulator bits, [0, 64]
  bool relu = true;
  bool accumulate_chain = false;  // driver hint: C is fed from the previous result

  const FormatSpec& lane_spec() const;
  unsigned lanes() const {
    return (mode == MacMode::DualE2M1 || mode == MacMode::DualE1M2) ? 2u : 1u;
  }
  // Accumulator width: double-width product + guard bits + 2 headroom bits,
  // the smallest width free of wraparound for the two-term signed sum.
  unsigned acc_width() const { return 2u * (lane_spec().man_bits + 1u) + guard_bits + 2u; }
};

// One aligned two's-complement term at accumulator width W.
struct AlignedTerm {
  i128 value = 0;
  bool sticky = false;  // truncated-away bits were nonzero
};

// Result of one MAC word: packed output plus per-lane sticky flags.
struct MacResult {
  PackedWord bits;
  std::array<FpFlags, 2> flags{};  // [lane]; single-lane modes use [0]
  unsigned lanes = 1;
};

uint8_t lane_bits(const MacResult& r, unsigned lane);

// ---- per-stage state, threaded through S0..S5 ------------------------------

struct LaneState {
  DecodedFloat a, b, c;
  // Special inputs (NaN/Inf rule table) resolve at S0 and bypass arithmetic.
  bool special = false;
  DecodedFloat special_value{};
  bool invalid = false;
  // S1
  uint8_t sign_p = 0;  // XOR of operand signs
  unsigned sig_p = 0;  // significand product
  int e_p = 0;
  ExpCompareResult cmp{};
  // S2
  AlignedTerm term_p{}, term_c{};
  // S3
  i128 acc = 0;
  // S4
  DecodedFloat norm{};
  bool inexact = false;
};

struct MacTxn {
  PackedWord a, b, c;
  unsigned lanes = 1;
  std::array<LaneState, 2> lane{};
};

MacTxn stage0_decode(PackedWord a, PackedWord b, PackedWord c, const MacConfig& cfg);
void stage1_multiply_compare(MacTxn& t, const MacConfig& cfg);
void stage2_align(MacTxn& t, const MacConfig& cfg);
void stage3_accumulate(MacTxn& t, const MacConfig& cfg);
void stage4_normalize(MacTxn& t, const MacConfig& cfg);
MacResult stage5_output(MacTxn& t, const MacConfig& cfg);

// ---- datapath primitives ----------------------------------------------------

// Right shift with magnitude truncation first, then two's-complement
// negation for negative terms (in that order). Shifts past the width clamp
// to a zero value; sticky reports any dropped nonzero bit.
AlignedTerm align_shift(u128 magnitude, unsigned shift, bool negative, unsigned width);

struct SigTerm {
  u128 magnitude = 0;  // at the product fixed-point scale, guard not applied
  bool negative = false;
};

// S2: place both terms on the common accumulator grid using the
// comparator's precomputed shifts; guard bits are appended here.
std::pair<AlignedTerm, AlignedTerm> align_terms(const SigTerm& p, const SigTerm& c,
                                                const ExpCompareResult& cmp,
                                                const MacConfig& cfg);

// 3:2 carry-save compressor: sum = x^y^z, carry = majority(x,y,z) << 1, both
// wrapped at `width`; sum + carry == x + y + z (mod 2^width).
void csa_3to2(u128 x, u128 y, u128 z, unsigned width, u128& sum, u128& carry);

// Observability hook for the carry-select structure.
struct CslaTrace {
  std::vector<uint8_t> block_carry_in;  // selected carry per block, LSB block first
};

// Carry-select adder: per-block results precomputed for carry-in 0 and 1,
// selected by the incoming block carry; equals s + k (mod 2^width).
u128 carry_select_add(u128 s, u128 k, unsigned width, unsigned block_bits = 4,
                      CslaTrace* trace = nullptr);

// S4: sign extraction, leading-zero count, shift to the 1.x position and
// magnitude truncation to the target mantissa width (no rounding). `e_ref`
// is the comparator's reference exponent. Values below the subnormal range
// flush to a signed zero; `inexact` reports dropped nonzero bits.
DecodedFloat normalize(i128 acc, int e_ref, const MacConfig& cfg, bool* inexact = nullptr);

// S5 activation: negative values (including -0 and -Inf) clamp to +0 by
// sign-bit inspection; NaN passes through.
DecodedFloat relu(const DecodedFloat& v);

// One-shot functional MAC over packed words.
MacResult mac(PackedWord a, PackedWord b, PackedWord c, const MacConfig& cfg);

}  // namespace fpmac
