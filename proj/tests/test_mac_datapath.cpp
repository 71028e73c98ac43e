#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fpmac/mac_datapath.hpp"

using namespace fpmac;

namespace {

PackedWord W8(uint8_t b) { return PackedWord{b, WordLayout::SingleFP8}; }
PackedWord W4(uint8_t b) { return PackedWord{b, WordLayout::DualFP4}; }

u128 wmask(unsigned w) { return (static_cast<u128>(1) << w) - 1; }

u128 rand_bits(std::mt19937_64& rng, unsigned w) {
  u128 v = (static_cast<u128>(rng()) << 64) | rng();
  return v & wmask(w);
}

}  // namespace

TEST_CASE("MacConfig geometry") {
  MacConfig e4{MacMode::E4M3, 3, true, false};
  CHECK(e4.lanes() == 1);
  CHECK(e4.lane_spec().name == Format::E4M3);
  CHECK(e4.acc_width() == 2 * 4 + 3 + 2);

  MacConfig d2{MacMode::DualE2M1, 8, true, false};
  CHECK(d2.lanes() == 2);
  CHECK(d2.lane_spec().name == Format::E2M1);
  CHECK(d2.acc_width() == 2 * 2 + 8 + 2);

  MacConfig e5{MacMode::E5M2, 64, false, false};
  CHECK(e5.acc_width() == 2 * 3 + 64 + 2);  // needs the 128-bit accumulator

  CHECK(parse_mac_mode("dual-e1m2") == MacMode::DualE1M2);
  CHECK(mac_mode_name(MacMode::DualE2M1) == "dual-e2m1");
  CHECK_THROWS_AS(parse_mac_mode("fp16"), std::invalid_argument);
}

TEST_CASE("align_shift: truncate first, then complement") {
  // no shift: unchanged, sticky clear
  const AlignedTerm t0 = align_shift(0b1011, 0, false, 8);
  CHECK(t0.value == 0b1011);
  CHECK(!t0.sticky);

  // dropped bits 11 != 0 -> sticky
  const AlignedTerm t1 = align_shift(0b1011, 2, false, 8);
  CHECK(t1.value == 0b10);
  CHECK(t1.sticky);

  // negative: truncate the magnitude, then negate
  const AlignedTerm t2 = align_shift(0b0110, 1, true, 8);
  CHECK(t2.value == -3);
  CHECK(!t2.sticky);  // dropped bit was 0

  // shift past the width clamps to zero with sticky
  const AlignedTerm t3 = align_shift(0xFF, 200, false, 8);
  CHECK(t3.value == 0);
  CHECK(t3.sticky);
  const AlignedTerm t4 = align_shift(0, 200, true, 8);
  CHECK(t4.value == 0);
  CHECK(!t4.sticky);
}

TEST_CASE("sticky stays clear while the shift fits in the guard slack") {
  MacConfig cfg{MacMode::E4M3, 3, true, false};
  for (unsigned x = 1; x < 256; ++x) {
    for (unsigned sh = 0; sh <= cfg.guard_bits; ++sh) {
      ExpCompareResult cmp{0, 0, sh};
      const auto [p, c] = align_terms({x, false}, {x, false}, cmp, cfg);
      CHECK(!p.sticky);
      CHECK(!c.sticky);
    }
  }
}

TEST_CASE("csa_3to2 basics and algebra") {
  u128 s, k;
  csa_3to2(0, 0, 0, 13, s, k);
  CHECK(s == 0);
  CHECK(k == 0);
  csa_3to2(1, 1, 1, 13, s, k);
  CHECK(s == 1);
  CHECK(k == 2);

  std::mt19937_64 rng(11);
  for (unsigned w : {13u, 40u, 72u}) {
    // boundary patterns: 0, all-ones, sign bit
    const u128 specials[3] = {0, wmask(w), static_cast<u128>(1) << (w - 1)};
    for (const u128 x : specials)
      for (const u128 y : specials)
        for (const u128 z : specials) {
          csa_3to2(x, y, z, w, s, k);
          CHECK(((s + k) & wmask(w)) == ((x + y + z) & wmask(w)));
        }
    for (int i = 0; i < 100000; ++i) {
      const u128 x = rand_bits(rng, w), y = rand_bits(rng, w), z = rand_bits(rng, w);
      csa_3to2(x, y, z, w, s, k);
      CHECK(((s + k) & wmask(w)) == ((x + y + z) & wmask(w)));
      // per-bit structure
      CHECK(s == ((x ^ y ^ z) & wmask(w)));
      CHECK(k == ((((x & y) | (x & z) | (y & z)) << 1) & wmask(w)));
    }
  }
}

TEST_CASE("carry_select_add equals integer addition and exposes block selects") {
  CslaTrace trace;
  CHECK(carry_select_add(0x0F, 0x01, 8, 4, &trace) == 0x10);
  REQUIRE(trace.block_carry_in.size() == 2);
  CHECK(trace.block_carry_in[0] == 0);
  CHECK(trace.block_carry_in[1] == 1);  // the mux picked the carry-in-1 block

  for (unsigned w : {13u, 40u, 72u}) {
    std::mt19937_64 rng(w);
    for (int i = 0; i < 100000; ++i) {
      const u128 s = rand_bits(rng, w), k = rand_bits(rng, w);
      CHECK(carry_select_add(s, k, w) == ((s + k) & wmask(w)));
    }
    // additive identity and all-ones wraparound
    CHECK(carry_select_add(0x5A, 0, w) == 0x5A);
    CHECK(carry_select_add(wmask(w), 1, w) == 0);
    // block count
    CslaTrace t2;
    carry_select_add(1, 2, w, 4, &t2);
    CHECK(t2.block_carry_in.size() == (w + 3) / 4);
  }
}

TEST_CASE("CSA + CSLA composition equals plain three-term addition") {
  std::mt19937_64 rng(7);
  const unsigned w = 13;
  for (int i = 0; i < 100000; ++i) {
    const u128 x = rand_bits(rng, w), y = rand_bits(rng, w), z = rand_bits(rng, w);
    u128 s, k;
    csa_3to2(x, y, z, w, s, k);
    CHECK(carry_select_add(s, k, w) == ((x + y + z) & wmask(w)));
  }
}

TEST_CASE("normalize") {
  MacConfig cfg{MacMode::E4M3, 3, true, false};  // fixed point at bit 9

  bool inx = true;
  const DecodedFloat z = normalize(0, 123, cfg, &inx);
  CHECK(z.cls == FpClass::Zero);
  CHECK(z.sign == 0);
  CHECK(!inx);

  // magnitude exactly at the 1.0 position
  const DecodedFloat one = normalize(static_cast<i128>(1) << 9, 0, cfg, &inx);
  CHECK(one.cls == FpClass::Normal);
  CHECK(one.exp_unbiased == 0);
  CHECK(one.significand == 0b1000);
  CHECK(!inx);

  // acc holding 7.0 -> 1.75 * 2^2
  const DecodedFloat seven = normalize(static_cast<i128>(7) << 9, 0, cfg, &inx);
  CHECK(seven.cls == FpClass::Normal);
  CHECK(seven.exp_unbiased == 2);
  CHECK(seven.significand == 0b1110);
  CHECK(!inx);

  const DecodedFloat neg = normalize(-(static_cast<i128>(7) << 9), 0, cfg, &inx);
  CHECK(neg.sign == 1);
  CHECK(neg.exp_unbiased == 2);
  CHECK(neg.significand == 0b1110);

  // truncation drops nonzero low bits -> inexact
  const DecodedFloat t = normalize((static_cast<i128>(7) << 9) | 1, 0, cfg, &inx);
  CHECK(t.significand == 0b1110);
  CHECK(inx);

  // subnormal landing: 2^-7 in E4M3 is 0.100 * 2^-6
  const DecodedFloat sub = normalize(static_cast<i128>(1) << 9, -7, cfg, &inx);
  CHECK(sub.cls == FpClass::Subnormal);
  CHECK(sub.exp_unbiased == -6);
  CHECK(sub.significand == 0b100);
  CHECK(!inx);

  // below the subnormal grid: flush to signed zero, inexact
  const DecodedFloat fl = normalize(-(static_cast<i128>(1) << 9), -20, cfg, &inx);
  CHECK(fl.cls == FpClass::Zero);
  CHECK(fl.sign == 1);
  CHECK(inx);
}

TEST_CASE("relu") {
  DecodedFloat neg{};
  neg.sign = 1;
  neg.cls = FpClass::Normal;
  neg.exp_unbiased = 2;
  neg.significand = 0b1110;
  const DecodedFloat r = relu(neg);
  CHECK(r.cls == FpClass::Zero);
  CHECK(r.sign == 0);

  DecodedFloat pos{};
  pos.cls = FpClass::Normal;
  pos.exp_unbiased = 1;
  pos.significand = 0b1110;  // +3.5
  CHECK(relu(pos).significand == 0b1110);
  CHECK(relu(pos).cls == FpClass::Normal);

  DecodedFloat nan{};
  nan.cls = FpClass::NaN;
  CHECK(relu(nan).cls == FpClass::NaN);

  DecodedFloat negzero{};
  negzero.sign = 1;
  CHECK(relu(negzero).sign == 0);

  // idempotence over every decoded pattern of every format
  for (Format f : {Format::E4M3, Format::E5M2, Format::E2M1, Format::E1M2}) {
    const FormatSpec& s = format_spec(f);
    for (unsigned p = 0; p < (1u << s.total_bits); ++p) {
      const DecodedFloat d = decode(static_cast<uint8_t>(p), s);
      const DecodedFloat once = relu(d);
      const DecodedFloat twice = relu(once);
      CHECK(once.sign == twice.sign);
      CHECK(once.cls == twice.cls);
      CHECK(once.significand == twice.significand);
      CHECK(once.exp_unbiased == twice.exp_unbiased);
    }
  }
}

TEST_CASE("mac examples") {
  MacConfig e4{MacMode::E4M3, 3, true, false};
  CHECK(mac(W8(0x38), W8(0x38), W8(0x00), e4).bits.bits == 0x38);  // 1*1+0
  CHECK(mac(W8(0x40), W8(0x44), W8(0x38), e4).bits.bits == 0x4E);  // 2*3+1 = 7
  CHECK(mac(W8(0x40), W8(0xC4), W8(0x00), e4).bits.bits == 0x00);  // ReLU clamps -6
  CHECK(mac(W8(0x00), W8(0x7E), W8(0x00), e4).bits.bits == 0x00);  // 0 * max finite

  MacConfig e4n = e4;
  e4n.relu = false;
  CHECK(mac(W8(0x40), W8(0xC4), W8(0x00), e4n).bits.bits == 0xCC);  // -6.0

  MacConfig d2{MacMode::DualE2M1, 3, true, false};
  const MacResult dual = mac(W4(0x77), W4(0x11), W4(0x00), d2);
  CHECK(dual.bits.bits == 0x55);  // both lanes 6.0 * 0.5 = 3.0
  CHECK(dual.lanes == 2);
  CHECK(lane_bits(dual, 0) == 0x5);
  CHECK(lane_bits(dual, 1) == 0x5);
}

TEST_CASE("special-value rule table") {
  MacConfig e4{MacMode::E4M3, 3, true, false};
  // NaN input propagates as the canonical NaN and raises invalid
  const MacResult rn = mac(W8(0x7F), W8(0x38), W8(0x00), e4);
  CHECK(rn.bits.bits == 0x7F);
  CHECK(rn.flags[0].invalid);

  MacConfig e5{MacMode::E5M2, 3, true, false};
  const FormatSpec& s5 = format_spec(Format::E5M2);
  // +Inf * 1.0 + -Inf -> NaN, invalid
  const MacResult rii = mac(W8(0x7C), W8(0x3C), W8(0xFC), e5);
  CHECK(rii.bits.bits == s5.canonical_nan_bits());
  CHECK(rii.flags[0].invalid);
  // 0 * Inf -> NaN, invalid
  const MacResult rzi = mac(W8(0x00), W8(0x7C), W8(0x00), e5);
  CHECK(rzi.bits.bits == s5.canonical_nan_bits());
  CHECK(rzi.flags[0].invalid);
  // Inf * 1 + 1 -> Inf (not invalid)
  const MacResult ri = mac(W8(0x7C), W8(0x3C), W8(0x3C), e5);
  CHECK(ri.bits.bits == s5.inf_bits());
  CHECK(!ri.flags[0].invalid);
  // -Inf with ReLU on clamps to +0
  const MacResult rni = mac(W8(0xFC), W8(0x3C), W8(0x00), e5);
  CHECK(rni.bits.bits == 0x00);
  // finite + Inf addend passes the addend through
  MacConfig e5n = e5;
  e5n.relu = false;
  const MacResult rc = mac(W8(0x3C), W8(0x3C), W8(0xFC), e5n);
  CHECK(rc.bits.bits == 0xFC);
}

TEST_CASE("overflow saturation and flags") {
  MacConfig e4{MacMode::E4M3, 3, false, false};
  // 448 * 2 overflows; E4M3 saturates to max finite
  const MacResult r = mac(W8(0x7E), W8(0x40), W8(0x00), e4);
  CHECK(r.bits.bits == 0x7E);
  CHECK(r.flags[0].overflow);

  MacConfig e5{MacMode::E5M2, 3, false, false};
  // E5M2 overflows to Inf
  const MacResult r5 = mac(W8(0x7B), W8(0x7B), W8(0x00), e5);
  CHECK(r5.bits.bits == format_spec(Format::E5M2).inf_bits());
  CHECK(r5.flags[0].overflow);

  // underflow: product far below the subnormal range flushes with flags
  const MacResult ru = mac(W8(0x01), W8(0x01), W8(0x00), e5);
  CHECK(ru.bits.bits == 0x00);
  CHECK(ru.flags[0].underflow);
  CHECK(ru.flags[0].inexact);
}

TEST_CASE("dual-lane independence") {
  std::mt19937_64 rng(3);
  for (MacMode m : {MacMode::DualE2M1, MacMode::DualE1M2}) {
    MacConfig cfg{m, 3, true, false};
    for (unsigned a0 = 0; a0 < 16; ++a0) {
      for (unsigned b0 = 0; b0 < 16; ++b0) {
        const unsigned c0 = static_cast<unsigned>(rng() & 0xF);
        const unsigned a1 = static_cast<unsigned>(rng() & 0xF);
        const unsigned b1 = static_cast<unsigned>(rng() & 0xF);
        const unsigned c1 = static_cast<unsigned>(rng() & 0xF);
        const MacResult mixed = mac(pack_dual(a1, a0), pack_dual(b1, b0), pack_dual(c1, c0), cfg);
        const MacResult pure = mac(pack_dual(a0, a0), pack_dual(b0, b0), pack_dual(c0, c0), cfg);
        CHECK(lane_bits(mixed, 0) == lane_bits(pure, 0));
      }
    }
  }
}

TEST_CASE("one-shot mac equals the composed stage functions") {
  std::mt19937_64 rng(17);
  MacConfig cfg{MacMode::E5M2, 3, true, false};
  for (int i = 0; i < 2000; ++i) {
    const auto a = W8(static_cast<uint8_t>(rng()));
    const auto b = W8(static_cast<uint8_t>(rng()));
    const auto c = W8(static_cast<uint8_t>(rng()));
    MacTxn t = stage0_decode(a, b, c, cfg);
    stage1_multiply_compare(t, cfg);
    stage2_align(t, cfg);
    stage3_accumulate(t, cfg);
    stage4_normalize(t, cfg);
    const MacResult staged = stage5_output(t, cfg);
    const MacResult oneshot = mac(a, b, c, cfg);
    CHECK(staged.bits.bits == oneshot.bits.bits);
  }
}
