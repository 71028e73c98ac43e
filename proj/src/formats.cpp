// formats.cpp - format table, decode/encode, packing and value rendering.

#include "fpmac/formats.hpp"

#include <cassert>
#include <stdexcept>

namespace fpmac {

namespace {

constexpr std::array<FormatSpec, 4> kSpecs = {{
    // name          bits exp man bias  inf    nan
    {Format::E4M3, 8, 4, 3, 7, false, true},
    {Format::E5M2, 8, 5, 2, 15, true, true},
    {Format::E2M1, 4, 2, 1, 1, false, false},
    {Format::E1M2, 4, 1, 2, 1, false, false},
}};

constexpr std::array<std::string_view, 4> kNames = {"e4m3", "e5m2", "e2m1", "e1m2"};

}  // namespace

std::string_view fp_class_name(FpClass c) {
  switch (c) {
    case FpClass::Zero: return "zero";
    case FpClass::Subnormal: return "subnormal";
    case FpClass::Normal: return "normal";
    case FpClass::Inf: return "inf";
    case FpClass::NaN: return "nan";
  }
  return "?";
}

int FormatSpec::e_max() const {
  // E5M2 reserves the all-ones exponent for Inf/NaN; E4M3 keeps it finite.
  const unsigned top = has_infinity ? exp_field_max() - 1u : exp_field_max();
  return static_cast<int>(top) - bias;
}

unsigned FormatSpec::max_man_at_emax() const {
  // E4M3: S.1111.111 is NaN, so the top exponent stops one mantissa short.
  if (has_nan && !has_infinity) return man_mask() - 1u;
  return man_mask();
}

uint8_t FormatSpec::max_finite_bits() const {
  const unsigned field = static_cast<unsigned>(e_max() + bias);
  return static_cast<uint8_t>((field << man_bits) | max_man_at_emax());
}

uint8_t FormatSpec::inf_bits() const {
  assert(has_infinity);
  return static_cast<uint8_t>(exp_field_max() << man_bits);
}

uint8_t FormatSpec::canonical_nan_bits() const {
  assert(has_nan);
  if (has_infinity)  // quiet NaN: mantissa MSB set
    return static_cast<uint8_t>((exp_field_max() << man_bits) | (1u << (man_bits - 1)));
  return static_cast<uint8_t>((exp_field_max() << man_bits) | man_mask());
}

const FormatSpec& format_spec(Format f) { return kSpecs[static_cast<size_t>(f)]; }

std::string_view format_name(Format f) { return kNames[static_cast<size_t>(f)]; }

Format parse_format(std::string_view name) {
  for (size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return static_cast<Format>(i);
  throw std::invalid_argument("unknown format: " + std::string(name));
}

DecodedFloat decode(uint8_t raw, const FormatSpec& spec) {
  const uint8_t bits = raw & spec.word_mask();
  DecodedFloat d{};
  d.sign = static_cast<uint8_t>((bits >> (spec.total_bits - 1u)) & 1u);
  const unsigned ef = (bits >> spec.man_bits) & spec.exp_field_max();
  const unsigned man = bits & spec.man_mask();

  if (spec.has_nan && ef == spec.exp_field_max()) {
    if (spec.has_infinity) {
      d.cls = (man == 0) ? FpClass::Inf : FpClass::NaN;
      d.exp_unbiased = spec.e_max() + 1;
      d.significand = man;
      return d;
    }
    if (man == spec.man_mask()) {  // E4M3: only the all-ones mantissa
      d.cls = FpClass::NaN;
      d.significand = man;
      return d;
    }
  }

  if (ef == 0) {
    d.exp_unbiased = spec.e_min();
    d.significand = man;
    d.cls = (man == 0) ? FpClass::Zero : FpClass::Subnormal;
  } else {
    d.exp_unbiased = static_cast<int>(ef) - spec.bias;
    d.significand = (1u << spec.man_bits) | man;
    d.cls = FpClass::Normal;
  }
  return d;
}

uint8_t encode(const DecodedFloat& v, const FormatSpec& spec, FpFlags* flags) {
  FpFlags f{};
  const uint8_t sbit = v.sign ? spec.sign_bit() : 0;
  uint8_t bits = 0;

  switch (v.cls) {
    case FpClass::NaN:
      if (spec.has_nan) {
        bits = spec.canonical_nan_bits();
      } else {
        bits = static_cast<uint8_t>(sbit | spec.max_finite_bits());
        f.invalid = true;
      }
      break;

    case FpClass::Inf:
      if (spec.has_infinity) {
        bits = static_cast<uint8_t>(sbit | spec.inf_bits());
      } else {
        bits = static_cast<uint8_t>(sbit | spec.max_finite_bits());
        f.overflow = true;
        f.inexact = true;
      }
      break;

    case FpClass::Zero:
      bits = sbit;
      break;

    case FpClass::Subnormal:
      bits = static_cast<uint8_t>(sbit | (v.significand & spec.man_mask()));
      break;

    case FpClass::Normal: {
      const int e = v.exp_unbiased;
      const uint32_t sig = v.significand;
      const bool too_big =
          e > spec.e_max() ||
          (e == spec.e_max() && (sig & spec.man_mask()) > spec.max_man_at_emax());
      if (too_big) {
        bits = spec.has_infinity ? static_cast<uint8_t>(sbit | spec.inf_bits())
                                 : static_cast<uint8_t>(sbit | spec.max_finite_bits());
        f.overflow = true;
        f.inexact = true;
      } else if (e < spec.e_min()) {
        // Normalizer output should already be subnormal-aligned; demote here
        // so encode stays total.
        const unsigned sh = static_cast<unsigned>(spec.e_min() - e);
        const uint32_t sub = sh >= 32 ? 0u : sig >> sh;
        const bool lost = sh >= 32 ? sig != 0 : (sub << sh) != sig;
        f.inexact = lost;
        f.underflow = lost;
        bits = static_cast<uint8_t>(sbit | (sub & spec.man_mask()));
      } else {
        const unsigned field = static_cast<unsigned>(e + spec.bias);
        bits = static_cast<uint8_t>(sbit | (field << spec.man_bits) |
                                    (v.significand & spec.man_mask()));
      }
      break;
    }
  }

  if (flags) *flags = f;
  return bits;
}

PackedWord pack_dual(uint8_t lane1, uint8_t lane0) {
  PackedWord w;
  w.bits = static_cast<uint8_t>(((lane1 & 0xFu) << 4) | (lane0 & 0xFu));
  w.layout = WordLayout::DualFP4;
  return w;
}

std::pair<uint8_t, uint8_t> unpack_dual(const PackedWord& w) {
  return {static_cast<uint8_t>((w.bits >> 4) & 0xFu), static_cast<uint8_t>(w.bits & 0xFu)};
}

int sign_magnitude_ordinal(uint8_t bits, const FormatSpec& spec) {
  const uint8_t masked = bits & spec.word_mask();
  const int mag = masked & (spec.sign_bit() - 1u);
  return (masked & spec.sign_bit()) ? -mag : mag;
}

std::string decimal_string(const DecodedFloat& v, const FormatSpec& spec) {
  if (v.cls == FpClass::NaN) return "nan";
  if (v.cls == FpClass::Inf) return v.sign ? "-inf" : "inf";

  uint64_t mag = v.significand;
  if (mag == 0) return v.sign ? "-0.0" : "0.0";

  int e2 = v.exp_unbiased - static_cast<int>(spec.man_bits);
  while ((mag & 1u) == 0 && e2 < 0) {
    mag >>= 1;
    ++e2;
  }

  std::string s = v.sign ? "-" : "";
  if (e2 >= 0) {
    s += std::to_string(mag << e2);
    s += ".0";
    return s;
  }

  // mag * 2^-d == (mag * 5^d) / 10^d, rendered with d fractional digits.
  const unsigned d = static_cast<unsigned>(-e2);  // <= 17 for E5M2
  uint64_t pow5 = 1;
  for (unsigned i = 0; i < d; ++i) pow5 *= 5;
  const uint64_t ip = mag >> d;
  const uint64_t frac = (mag - (ip << d)) * pow5;
  std::string digits = std::to_string(frac);
  digits.insert(0, d - digits.size(), '0');
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  s += std::to_string(ip);
  s += '.';
  s += digits;
  return s;
}

}  // namespace fpmac
