#pragma once
// Exact-arithmetic reference for the PE: a*b + c over unbounded integers,
// truncating quantization to any target format, and sweep-based error
// accounting (ULP distance on the format's value ladder, absolute error).

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>

#include "fpmac/formats.hpp"
#include "fpmac/mac_datapath.hpp"

namespace fpmac {

using BigInt = boost::multiprecision::cpp_int;

// Exact dyadic value: (-1)^sign * numerator * 2^exp2 with the numerator odd
// or zero (canonical form). Arithmetic results that are exactly zero
// canonicalize to +0 - the PE's two's-complement accumulator has no signed
// zero - while decoded -0 keeps its sign so that quantization stays the
// identity on representable patterns. Nonzero values flushed to zero by
// quantization also keep their sign, matching the PE normalizer.
struct ExactValue {
  uint8_t sign = 0;
  BigInt numerator;
  int64_t exp2 = 0;
  FpClass cls = FpClass::Zero;

  static ExactValue zero();
  static ExactValue infinity(uint8_t sign);
  static ExactValue nan();
  static ExactValue from_decoded(const DecodedFloat& v, const FormatSpec& spec);
  static ExactValue from_bits(uint8_t bits, const FormatSpec& spec);

  bool is_nan() const { return cls == FpClass::NaN; }
  bool is_inf() const { return cls == FpClass::Inf; }
  bool is_zero() const { return cls == FpClass::Zero; }
  bool is_finite() const { return !is_nan() && !is_inf(); }

  long double to_long_double() const;
};

// Exact product / sum with the same special-value rule table as the PE
// (NaN propagates, Inf*0 and Inf-Inf are NaN).
ExactValue exact_mul(const ExactValue& a, const ExactValue& b);
ExactValue exact_add(const ExactValue& a, const ExactValue& b);

// a*b + c, mathematically exact. Inputs share one format.
ExactValue exact_mac(const DecodedFloat& a, const DecodedFloat& b, const DecodedFloat& c,
                     const FormatSpec& spec);

// Negative values (including decoded -0) map to +0; NaN passes through.
ExactValue relu_exact(const ExactValue& v);

// Round-toward-zero quantizer: the largest-magnitude representable value
// not exceeding |v|, with v's sign. Overflow follows the format saturation
// policy (max finite, or Inf for E5M2).
uint8_t quantize_truncate(const ExactValue& v, const FormatSpec& spec);

// Ladder distance between two patterns of one format. Both NaN compare
// equal; exactly one NaN reports ULP_CLASS_MISMATCH.
inline constexpr unsigned kUlpClassMismatch = 0xFFFFu;
unsigned ulp_distance(uint8_t x, uint8_t y, const FormatSpec& spec);

struct ErrorStats {
  uint64_t samples = 0;         // lane results compared
  uint64_t mismatch_count = 0;  // sum of histogram counts with ulp > 0
  unsigned max_ulp = 0;
  long double sum_abs = 0.0L;  // over finite comparisons only
  uint64_t abs_samples = 0;
  std::map<unsigned, uint64_t> histogram;  // ulp distance -> count

  void record(unsigned ulp);
  void record_abs(long double abs_err);
  void merge(const ErrorStats& other);
  double mean_abs() const;
};

struct SweepDomain {
  enum class Kind { Exhaustive, Random };
  Kind kind = Kind::Exhaustive;
  uint64_t count = 0;  // random only
  uint64_t seed = 0;   // random only
};

// Largest exhaustive triple space accepted by sweep drivers.
inline constexpr uint64_t kExhaustiveTripleLimit = 1ull << 26;

// Per-lane triples in the exhaustive domain for a mode (16^3 or 256^3).
uint64_t exhaustive_domain_size(const MacConfig& cfg);

// Runs the PE and the oracle over the domain and accumulates per-lane error
// statistics. With cfg.relu set the oracle reference is
// quantize_truncate(relu_exact(exact_mac(...))); otherwise the activation is
// skipped on both sides. `threads` 0 = FPMAC_THREADS env or hardware count.
ErrorStats compare_sweep(const MacConfig& cfg, const SweepDomain& domain, unsigned threads = 0);

uint64_t merged_lane_results(const MacConfig& cfg, const SweepDomain& domain);

}  // namespace fpmac
