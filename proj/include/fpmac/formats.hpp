#pragma once
// Minifloat format descriptors and bit-level codecs for the four supported
// element formats: E4M3, E5M2 (8-bit) and E2M1, E1M2 (4-bit, packed two per
// byte). All operations are pure functions over immutable inputs.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace fpmac {

enum class Format : uint8_t { E4M3 = 0, E5M2 = 1, E2M1 = 2, E1M2 = 3 };

enum class FpClass : uint8_t { Zero, Subnormal, Normal, Inf, NaN };

std::string_view fp_class_name(FpClass c);

// Static descriptor of one minifloat format.
//
// Special-value policy:
//   E5M2       IEEE-like: all-ones exponent encodes Inf (mantissa 0) or NaN.
//   E4M3       no Inf; only S.1111.111 is NaN, the rest of the top exponent
//              is finite (max finite 448).
//   E2M1/E1M2  every pattern is finite.
struct FormatSpec {
  Format name;
  unsigned total_bits;  // 1 + exp_bits + man_bits
  unsigned exp_bits;
  unsigned man_bits;
  int bias;
  bool has_infinity;
  bool has_nan;

  unsigned exp_field_max() const { return (1u << exp_bits) - 1u; }
  unsigned man_mask() const { return (1u << man_bits) - 1u; }
  uint8_t word_mask() const { return static_cast<uint8_t>((1u << total_bits) - 1u); }
  uint8_t sign_bit() const { return static_cast<uint8_t>(1u << (total_bits - 1u)); }

  // Exponent of subnormals and of the smallest normal.
  int e_min() const { return 1 - bias; }
  // Largest finite exponent (for E4M3 the top exponent field is finite).
  int e_max() const;
  // Largest mantissa field usable at e_max (6 for E4M3, else man_mask()).
  unsigned max_man_at_emax() const;

  uint8_t max_finite_bits() const;     // +max-finite pattern
  uint8_t inf_bits() const;            // +Inf pattern (has_infinity formats)
  uint8_t canonical_nan_bits() const;  // quiet canonical NaN (has_nan formats)
};

const FormatSpec& format_spec(Format f);
std::string_view format_name(Format f);
Format parse_format(std::string_view name);  // throws std::invalid_argument

// Unpacked operand. For normals the significand carries the hidden bit:
//   value = (-1)^sign * significand * 2^(exp_unbiased - man_bits)
// Subnormals keep exp_unbiased = 1 - bias with significand < 2^man_bits;
// zeros use the same exponent convention with significand 0.
struct DecodedFloat {
  uint8_t sign = 0;
  int exp_unbiased = 0;
  uint32_t significand = 0;
  FpClass cls = FpClass::Zero;

  bool is_nan() const { return cls == FpClass::NaN; }
  bool is_inf() const { return cls == FpClass::Inf; }
  bool is_zero() const { return cls == FpClass::Zero; }
  bool is_finite() const { return !is_nan() && !is_inf(); }
};

enum class WordLayout : uint8_t { SingleFP8, DualFP4 };

// One 8-bit operand word: a single FP8 value, or two FP4 lanes with lane 1
// in bits[7:4] and lane 0 in bits[3:0]. A 4-bit value carried as SingleFP8
// is zero-padded in the upper nibble.
struct PackedWord {
  uint8_t bits = 0;
  WordLayout layout = WordLayout::SingleFP8;
};

// Sticky exception flags, one set per result lane.
struct FpFlags {
  bool overflow = false;
  bool underflow = false;
  bool invalid = false;
  bool inexact = false;
  bool any() const { return overflow || underflow || invalid || inexact; }
};

// Total over the pattern space: every input maps to exactly one class.
DecodedFloat decode(uint8_t bits, const FormatSpec& spec);

// Magnitude-truncating encoder (round toward zero; the only supported
// policy). Expects a value already normalized for `spec` (see normalize()).
// Out-of-range exponents saturate: formats without Inf clamp to max finite,
// E5M2 overflows to Inf. Any NaN encodes as the canonical quiet NaN; on
// formats without NaN it saturates to max finite and raises `invalid`.
uint8_t encode(const DecodedFloat& v, const FormatSpec& spec, FpFlags* flags = nullptr);

PackedWord pack_dual(uint8_t lane1, uint8_t lane0);
std::pair<uint8_t, uint8_t> unpack_dual(const PackedWord& w);  // {lane1, lane0}

// Signed index of a pattern on the format's value ladder: 0 for either zero,
// +-magnitude elsewhere; Inf lands one step past max finite. NaN patterns
// have no ordinal (callers filter them first).
int sign_magnitude_ordinal(uint8_t bits, const FormatSpec& spec);

// Exact decimal rendering of a decoded value: "7.0", "-0.0625", "inf", "nan".
std::string decimal_string(const DecodedFloat& v, const FormatSpec& spec);

}  // namespace fpmac
