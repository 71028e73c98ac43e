// mac_datapath.cpp - the S0..S5 MAC datapath and its primitives.

#include "fpmac/mac_datapath.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace fpmac {

namespace {

inline u128 width_mask(unsigned width) {
  return (static_cast<u128>(1) << width) - 1;  // width < 128 always holds here
}

inline int msb_index(u128 x) {  // undefined for x == 0
  const uint64_t hi = static_cast<uint64_t>(x >> 64);
  if (hi) return 127 - __builtin_clzll(hi);
  return 63 - __builtin_clzll(static_cast<uint64_t>(x));
}

DecodedFloat make_inf(uint8_t sign) {
  DecodedFloat d{};
  d.sign = sign;
  d.cls = FpClass::Inf;
  return d;
}

DecodedFloat make_nan() {
  DecodedFloat d{};
  d.cls = FpClass::NaN;
  return d;
}

// S0 special-value rule table. Zeros stay on the arithmetic path; they are
// handled by parking their exponent at the comparator floor in S1.
void resolve_specials(LaneState& ls) {
  const DecodedFloat &a = ls.a, &b = ls.b, &c = ls.c;
  if (a.is_nan() || b.is_nan() || c.is_nan()) {
    ls.special = true;
    ls.invalid = true;
    ls.special_value = make_nan();
    return;
  }
  if ((a.is_inf() && b.is_zero()) || (b.is_inf() && a.is_zero())) {
    ls.special = true;
    ls.invalid = true;
    ls.special_value = make_nan();
    return;
  }
  const uint8_t sp = a.sign ^ b.sign;
  if (a.is_inf() || b.is_inf()) {
    if (c.is_inf() && c.sign != sp) {  // Inf - Inf
      ls.special = true;
      ls.invalid = true;
      ls.special_value = make_nan();
      return;
    }
    ls.special = true;
    ls.special_value = make_inf(sp);
    return;
  }
  if (c.is_inf()) {
    ls.special = true;
    ls.special_value = c;
  }
}

}  // namespace

std::string_view mac_mode_name(MacMode m) {
  switch (m) {
    case MacMode::E4M3: return "e4m3";
    case MacMode::E5M2: return "e5m2";
    case MacMode::DualE2M1: return "dual-e2m1";
    case MacMode::DualE1M2: return "dual-e1m2";
  }
  return "?";
}

MacMode parse_mac_mode(std::string_view name) {
  if (name == "e4m3") return MacMode::E4M3;
  if (name == "e5m2") return MacMode::E5M2;
  if (name == "dual-e2m1") return MacMode::DualE2M1;
  if (name == "dual-e1m2") return MacMode::DualE1M2;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

const FormatSpec& MacConfig::lane_spec() const {
  switch (mode) {
    case MacMode::E4M3: return format_spec(Format::E4M3);
    case MacMode::E5M2: return format_spec(Format::E5M2);
    case MacMode::DualE2M1: return format_spec(Format::E2M1);
    case MacMode::DualE1M2: return format_spec(Format::E1M2);
  }
  return format_spec(Format::E4M3);
}

uint8_t lane_bits(const MacResult& r, unsigned lane) {
  if (r.lanes == 2) {
    const auto [hi, lo] = unpack_dual(r.bits);
    return lane ? hi : lo;
  }
  return r.bits.bits;
}

// ---- S0: input processing ----------------------------------------------------

MacTxn stage0_decode(PackedWord a, PackedWord b, PackedWord c, const MacConfig& cfg) {
  const FormatSpec& spec = cfg.lane_spec();
  MacTxn t;
  t.a = a;
  t.b = b;
  t.c = c;
  t.lanes = cfg.lanes();
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    uint8_t ab, bb, cb;
    if (t.lanes == 2) {
      ab = ln ? static_cast<uint8_t>(a.bits >> 4) : static_cast<uint8_t>(a.bits & 0xF);
      bb = ln ? static_cast<uint8_t>(b.bits >> 4) : static_cast<uint8_t>(b.bits & 0xF);
      cb = ln ? static_cast<uint8_t>(c.bits >> 4) : static_cast<uint8_t>(c.bits & 0xF);
    } else {
      ab = a.bits;
      bb = b.bits;
      cb = c.bits;
    }
    LaneState& ls = t.lane[ln];
    ls.a = decode(ab, spec);
    ls.b = decode(bb, spec);
    ls.c = decode(cb, spec);
    resolve_specials(ls);
  }
  return t;
}

// ---- S1: comparator and multiplier array --------------------------------------

void stage1_multiply_compare(MacTxn& t, const MacConfig& cfg) {
  const FormatSpec& spec = cfg.lane_spec();
  const ExponentComparator& cmp = comparator_for(spec);
  // Zero operands detected at S0 park at the comparator floor so a zero term
  // can never force an alignment shift onto the live term.
  const int e_floor = cmp.lo();

  if (cfg.mode == MacMode::DualE2M1) {
    // Both lanes share one multiplier block in split mode: 2-bit lane
    // significands ride the nibble halves.
    const uint8_t pa = static_cast<uint8_t>(((t.lane[1].a.significand & 0x3u) << 2) |
                                            (t.lane[0].a.significand & 0x3u));
    const uint8_t pb = static_cast<uint8_t>(((t.lane[1].b.significand & 0x3u) << 2) |
                                            (t.lane[0].b.significand & 0x3u));
    const uint8_t prod = unit_multiply(pa, pb, MulMode::Split2x2);
    t.lane[1].sig_p = prod >> 4;
    t.lane[0].sig_p = prod & 0xFu;
  } else {
    // E4M3/E5M2 use one full-mode block per word; dual E1M2 needs a full
    // 4x4 block per lane (3-bit significands, zero padded).
    for (unsigned ln = 0; ln < t.lanes; ++ln) {
      LaneState& ls = t.lane[ln];
      ls.sig_p = unit_multiply(static_cast<uint8_t>(ls.a.significand & 0xFu),
                               static_cast<uint8_t>(ls.b.significand & 0xFu),
                               MulMode::Full4x4);
    }
  }

  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    LaneState& ls = t.lane[ln];
    if (ls.special) continue;
    ls.sign_p = ls.a.sign ^ ls.b.sign;
    const bool p_zero = ls.a.is_zero() || ls.b.is_zero();
    ls.e_p = p_zero ? e_floor : product_exponent(ls.a.exp_unbiased, ls.b.exp_unbiased);
    const int e_c = ls.c.is_zero() ? e_floor : ls.c.exp_unbiased;
    ls.cmp = cmp.compare_align(ls.e_p, e_c);
  }
}

// ---- S2: alignment shifter -----------------------------------------------------

AlignedTerm align_shift(u128 magnitude, unsigned shift, bool negative, unsigned width) {
  AlignedTerm t;
  u128 kept;
  bool sticky;
  if (shift >= width) {
    kept = 0;
    sticky = magnitude != 0;
  } else {
    kept = magnitude >> shift;
    sticky = (kept << shift) != magnitude;
  }
  // Truncate first, then complement.
  t.value = negative ? -static_cast<i128>(kept) : static_cast<i128>(kept);
  t.sticky = sticky;
  return t;
}

std::pair<AlignedTerm, AlignedTerm> align_terms(const SigTerm& p, const SigTerm& c,
                                                const ExpCompareResult& cmp,
                                                const MacConfig& cfg) {
  const unsigned w = cfg.acc_width();
  const unsigned g = cfg.guard_bits;
  return {align_shift(p.magnitude << g, cmp.shift_p, p.negative, w),
          align_shift(c.magnitude << g, cmp.shift_c, c.negative, w)};
}

void stage2_align(MacTxn& t, const MacConfig& cfg) {
  const FormatSpec& spec = cfg.lane_spec();
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    LaneState& ls = t.lane[ln];
    if (ls.special) continue;
    const SigTerm p{static_cast<u128>(ls.sig_p), ls.sign_p != 0};
    // The addend scales up to the product fixed-point position.
    const SigTerm c{static_cast<u128>(ls.c.significand) << spec.man_bits, ls.c.sign != 0};
    std::tie(ls.term_p, ls.term_c) = align_terms(p, c, ls.cmp, cfg);
  }
}

// ---- S3: CSA tree + carry-select accumulate ------------------------------------

void csa_3to2(u128 x, u128 y, u128 z, unsigned width, u128& sum, u128& carry) {
  const u128 m = width_mask(width);
  x &= m;
  y &= m;
  z &= m;
  sum = (x ^ y ^ z) & m;
  carry = (((x & y) | (x & z) | (y & z)) << 1) & m;
}

u128 carry_select_add(u128 s, u128 k, unsigned width, unsigned block_bits, CslaTrace* trace) {
  const u128 m = width_mask(width);
  s &= m;
  k &= m;
  if (trace) trace->block_carry_in.clear();
  u128 result = 0;
  unsigned carry = 0;
  for (unsigned pos = 0; pos < width; pos += block_bits) {
    const unsigned nb = std::min(block_bits, width - pos);
    const u128 bm = width_mask(nb);
    const u128 bs = (s >> pos) & bm;
    const u128 bk = (k >> pos) & bm;
    // Both carry-in alternatives computed up front; the mux picks one.
    const u128 sum0 = bs + bk;
    const u128 sum1 = bs + bk + 1;
    if (trace) trace->block_carry_in.push_back(static_cast<uint8_t>(carry));
    const u128 chosen = carry ? sum1 : sum0;
    result |= (chosen & bm) << pos;
    carry = static_cast<unsigned>(chosen >> nb) & 1u;
  }
  return result & m;
}

void stage3_accumulate(MacTxn& t, const MacConfig& cfg) {
  const unsigned w = cfg.acc_width();
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    LaneState& ls = t.lane[ln];
    if (ls.special) continue;
    u128 sum, carry;
    csa_3to2(static_cast<u128>(ls.term_p.value), static_cast<u128>(ls.term_c.value), 0, w, sum,
             carry);
    const u128 acc_u = carry_select_add(sum, carry, w);
    // Reinterpret the W-bit word as two's complement.
    if ((acc_u >> (w - 1)) & 1)
      ls.acc = static_cast<i128>(acc_u | ~width_mask(w));
    else
      ls.acc = static_cast<i128>(acc_u);
  }
}

// ---- S4: LZA + normalizer/truncation -------------------------------------------

DecodedFloat normalize(i128 acc, int e_ref, const MacConfig& cfg, bool* inexact_out) {
  const FormatSpec& spec = cfg.lane_spec();
  const int m = static_cast<int>(spec.man_bits);
  // Accumulator grid: value = acc * 2^(e_ref - fixed_point).
  const int fixed_point = 2 * m + static_cast<int>(cfg.guard_bits);

  bool inexact = false;
  DecodedFloat r{};
  if (acc == 0) {
    if (inexact_out) *inexact_out = false;
    return r;  // +0
  }

  r.sign = acc < 0 ? 1 : 0;
  const u128 mag = r.sign ? static_cast<u128>(-acc) : static_cast<u128>(acc);
  const int lead = msb_index(mag);
  const int e = e_ref - fixed_point + lead;

  if (e >= spec.e_min()) {
    const int rshift = lead - m;
    uint32_t sig;
    if (rshift > 0) {
      sig = static_cast<uint32_t>(mag >> rshift);
      inexact = (static_cast<u128>(sig) << rshift) != mag;
    } else {
      sig = static_cast<uint32_t>(mag) << -rshift;
    }
    r.exp_unbiased = e;
    r.significand = sig;
    r.cls = FpClass::Normal;
  } else {
    // Below the normal range: land on the subnormal grid (LSB weight
    // 2^(e_min - man_bits)) or flush to a signed zero.
    const int rshift = (spec.e_min() - m) - (e_ref - fixed_point);
    uint32_t sig;
    if (rshift <= 0) {
      sig = static_cast<uint32_t>(mag) << -rshift;  // exact
    } else if (rshift >= 128) {
      sig = 0;
      inexact = true;
    } else {
      sig = static_cast<uint32_t>(mag >> rshift);
      inexact = (static_cast<u128>(sig) << rshift) != mag;
    }
    r.exp_unbiased = spec.e_min();
    r.significand = sig;
    r.cls = sig == 0 ? FpClass::Zero : FpClass::Subnormal;
  }

  if (inexact_out) *inexact_out = inexact;
  return r;
}

void stage4_normalize(MacTxn& t, const MacConfig& cfg) {
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    LaneState& ls = t.lane[ln];
    if (ls.special) continue;
    bool inx = false;
    ls.norm = normalize(ls.acc, ls.cmp.e_ref, cfg, &inx);
    ls.inexact = inx || ls.term_p.sticky || ls.term_c.sticky;
  }
}

// ---- S5: output processing / activation ----------------------------------------

DecodedFloat relu(const DecodedFloat& v) {
  if (v.cls == FpClass::NaN) return v;
  if (v.sign) return DecodedFloat{};  // +0
  return v;
}

MacResult stage5_output(MacTxn& t, const MacConfig& cfg) {
  const FormatSpec& spec = cfg.lane_spec();
  MacResult r;
  r.lanes = t.lanes;
  uint8_t lanes_out[2] = {0, 0};
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    LaneState& ls = t.lane[ln];
    DecodedFloat v = ls.special ? ls.special_value : ls.norm;
    if (cfg.relu) v = relu(v);
    FpFlags f{};
    lanes_out[ln] = encode(v, spec, &f);
    f.invalid = f.invalid || ls.invalid;
    if (!ls.special) {
      f.inexact = f.inexact || ls.inexact;
      const bool tiny =
          (ls.norm.cls == FpClass::Zero && ls.acc != 0) || ls.norm.cls == FpClass::Subnormal;
      if (tiny && ls.inexact) f.underflow = true;
    }
    r.flags[ln] = f;
  }
  if (t.lanes == 2) {
    r.bits = pack_dual(lanes_out[1], lanes_out[0]);
  } else {
    r.bits.bits = lanes_out[0];
    r.bits.layout = WordLayout::SingleFP8;
  }
  return r;
}

MacResult mac(PackedWord a, PackedWord b, PackedWord c, const MacConfig& cfg) {
  assert(cfg.guard_bits <= 64);
  MacTxn t = stage0_decode(a, b, c, cfg);
  stage1_multiply_compare(t, cfg);
  stage2_align(t, cfg);
  stage3_accumulate(t, cfg);
  stage4_normalize(t, cfg);
  return stage5_output(t, cfg);
}

}  // namespace fpmac
