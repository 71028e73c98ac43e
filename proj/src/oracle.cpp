// oracle.cpp - unbounded-integer reference MAC and sweep harness.

#include "fpmac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace fpmac {

namespace {

// floor(n * 2^sh) for n >= 0.
BigInt shift_floor(const BigInt& n, int64_t sh) {
  if (sh >= 0) return n << static_cast<unsigned>(sh);
  return n >> static_cast<unsigned>(-sh);
}

}  // namespace

ExactValue ExactValue::zero() { return ExactValue{}; }

ExactValue ExactValue::infinity(uint8_t sign) {
  ExactValue v;
  v.sign = sign;
  v.cls = FpClass::Inf;
  return v;
}

ExactValue ExactValue::nan() {
  ExactValue v;
  v.cls = FpClass::NaN;
  return v;
}

ExactValue ExactValue::from_decoded(const DecodedFloat& d, const FormatSpec& spec) {
  switch (d.cls) {
    case FpClass::NaN: return nan();
    case FpClass::Inf: return infinity(d.sign);
    case FpClass::Zero: {
      ExactValue v;
      v.sign = d.sign;  // decoded -0 keeps its sign
      return v;
    }
    default: break;
  }
  ExactValue v;
  v.sign = d.sign;
  v.cls = d.cls;
  uint32_t sig = d.significand;
  int64_t e2 = static_cast<int64_t>(d.exp_unbiased) - spec.man_bits;
  while ((sig & 1u) == 0) {
    sig >>= 1;
    ++e2;
  }
  v.numerator = sig;
  v.exp2 = e2;
  return v;
}

ExactValue ExactValue::from_bits(uint8_t bits, const FormatSpec& spec) {
  return from_decoded(decode(bits, spec), spec);
}

long double ExactValue::to_long_double() const {
  if (is_nan()) return std::numeric_limits<long double>::quiet_NaN();
  if (is_inf()) return sign ? -std::numeric_limits<long double>::infinity()
                            : std::numeric_limits<long double>::infinity();
  const long double mag =
      std::ldexp(numerator.convert_to<long double>(), static_cast<int>(exp2));
  return sign ? -mag : mag;
}

ExactValue exact_mul(const ExactValue& a, const ExactValue& b) {
  if (a.is_nan() || b.is_nan()) return ExactValue::nan();
  if (a.is_inf() || b.is_inf()) {
    if (a.is_zero() || b.is_zero()) return ExactValue::nan();
    return ExactValue::infinity(a.sign ^ b.sign);
  }
  if (a.is_zero() || b.is_zero()) return ExactValue::zero();
  ExactValue r;
  r.cls = FpClass::Normal;
  r.sign = a.sign ^ b.sign;
  r.numerator = a.numerator * b.numerator;  // odd * odd stays odd
  r.exp2 = a.exp2 + b.exp2;
  return r;
}

ExactValue exact_add(const ExactValue& a, const ExactValue& b) {
  if (a.is_nan() || b.is_nan()) return ExactValue::nan();
  if (a.is_inf()) {
    if (b.is_inf() && b.sign != a.sign) return ExactValue::nan();
    return a;
  }
  if (b.is_inf()) return b;
  if (a.is_zero()) return b.is_zero() ? ExactValue::zero() : b;
  if (b.is_zero()) return a;

  const int64_t e = std::min(a.exp2, b.exp2);
  BigInt an = a.numerator << static_cast<unsigned>(a.exp2 - e);
  BigInt bn = b.numerator << static_cast<unsigned>(b.exp2 - e);
  if (a.sign) an = -an;
  if (b.sign) bn = -bn;
  BigInt s = an + bn;
  if (s == 0) return ExactValue::zero();

  ExactValue r;
  r.cls = FpClass::Normal;
  r.sign = s < 0 ? 1 : 0;
  if (s < 0) s = -s;
  const unsigned tz = boost::multiprecision::lsb(s);
  r.numerator = s >> tz;
  r.exp2 = e + tz;
  return r;
}

ExactValue exact_mac(const DecodedFloat& a, const DecodedFloat& b, const DecodedFloat& c,
                     const FormatSpec& spec) {
  return exact_add(exact_mul(ExactValue::from_decoded(a, spec), ExactValue::from_decoded(b, spec)),
                   ExactValue::from_decoded(c, spec));
}

ExactValue relu_exact(const ExactValue& v) {
  if (v.is_nan()) return v;
  if (v.sign) return ExactValue::zero();
  return v;
}

uint8_t quantize_truncate(const ExactValue& v, const FormatSpec& spec) {
  const uint8_t sbit = v.sign ? spec.sign_bit() : 0;
  const auto saturate = [&]() -> uint8_t {
    return spec.has_infinity ? static_cast<uint8_t>(sbit | spec.inf_bits())
                             : static_cast<uint8_t>(sbit | spec.max_finite_bits());
  };

  if (v.is_nan())
    return spec.has_nan ? spec.canonical_nan_bits() : spec.max_finite_bits();
  if (v.is_inf()) return saturate();
  if (v.is_zero()) return sbit;

  const int m = static_cast<int>(spec.man_bits);
  const int64_t bitlen = static_cast<int64_t>(boost::multiprecision::msb(v.numerator)) + 1;
  const int64_t e = v.exp2 + bitlen - 1;  // floor(log2 |v|)

  if (e > spec.e_max()) return saturate();

  if (e < spec.e_min()) {
    // Subnormal grid, LSB weight 2^(e_min - man_bits); flushes keep the sign.
    const BigInt sig = shift_floor(v.numerator, v.exp2 - (spec.e_min() - m));
    return static_cast<uint8_t>(sbit | sig.convert_to<uint32_t>());
  }

  const BigInt sig_big = shift_floor(v.numerator, v.exp2 - (e - m));
  const uint32_t sig = sig_big.convert_to<uint32_t>();
  if (e == spec.e_max() && (sig & spec.man_mask()) > spec.max_man_at_emax()) return saturate();
  const unsigned field = static_cast<unsigned>(e + spec.bias);
  return static_cast<uint8_t>(sbit | (field << spec.man_bits) | (sig & spec.man_mask()));
}

unsigned ulp_distance(uint8_t x, uint8_t y, const FormatSpec& spec) {
  const bool xn = decode(x, spec).is_nan();
  const bool yn = decode(y, spec).is_nan();
  if (xn || yn) return (xn && yn) ? 0u : kUlpClassMismatch;
  const int ox = sign_magnitude_ordinal(x, spec);
  const int oy = sign_magnitude_ordinal(y, spec);
  return static_cast<unsigned>(ox >= oy ? ox - oy : oy - ox);
}

void ErrorStats::record(unsigned ulp) {
  ++samples;
  ++histogram[ulp];
  if (ulp > 0) ++mismatch_count;
  max_ulp = std::max(max_ulp, ulp);
}

void ErrorStats::record_abs(long double abs_err) {
  sum_abs += abs_err;
  ++abs_samples;
}

void ErrorStats::merge(const ErrorStats& other) {
  samples += other.samples;
  mismatch_count += other.mismatch_count;
  max_ulp = std::max(max_ulp, other.max_ulp);
  sum_abs += other.sum_abs;
  abs_samples += other.abs_samples;
  for (const auto& [ulp, n] : other.histogram) histogram[ulp] += n;
}

double ErrorStats::mean_abs() const {
  return abs_samples ? static_cast<double>(sum_abs / static_cast<long double>(abs_samples)) : 0.0;
}

uint64_t exhaustive_domain_size(const MacConfig& cfg) {
  const uint64_t n = 1ull << cfg.lane_spec().total_bits;
  return n * n * n;
}

namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested) return requested;
  if (const char* env = std::getenv("FPMAC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1u;
}

// Compare one word triple: PE per lane against the quantized exact value.
void sweep_words(uint8_t aw, uint8_t bw, uint8_t cw, const MacConfig& cfg,
                 const FormatSpec& spec, ErrorStats& stats) {
  const PackedWord a{aw, WordLayout::SingleFP8};
  const PackedWord b{bw, WordLayout::SingleFP8};
  const PackedWord c{cw, WordLayout::SingleFP8};
  const MacResult r = mac(a, b, c, cfg);
  for (unsigned ln = 0; ln < r.lanes; ++ln) {
    uint8_t al = aw, bl = bw, cl = cw;
    if (r.lanes == 2) {
      al = ln ? aw >> 4 : aw & 0xF;
      bl = ln ? bw >> 4 : bw & 0xF;
      cl = ln ? cw >> 4 : cw & 0xF;
    }
    ExactValue exact = exact_mac(decode(al, spec), decode(bl, spec), decode(cl, spec), spec);
    if (cfg.relu) exact = relu_exact(exact);
    const uint8_t ref = quantize_truncate(exact, spec);
    const uint8_t pe = lane_bits(r, ln);
    stats.record(ulp_distance(pe, ref, spec));
    const DecodedFloat pd = decode(pe, spec);
    if (exact.is_finite() && pd.is_finite()) {
      const long double pv =
          std::ldexp(static_cast<long double>(pd.significand),
                     pd.exp_unbiased - static_cast<int>(spec.man_bits)) *
          (pd.sign ? -1.0L : 1.0L);
      stats.record_abs(std::fabs(pv - exact.to_long_double()));
    }
  }
}

// Exhaustive dual-FP4 sweeps enumerate the per-lane nibble triples and
// drive both lanes with the same inputs; lane independence is covered by
// its own property test.
void sweep_index_range(uint64_t begin, uint64_t end, const MacConfig& cfg, ErrorStats& stats) {
  const FormatSpec& spec = cfg.lane_spec();
  const unsigned bits = spec.total_bits;
  const uint64_t n = 1ull << bits;
  for (uint64_t idx = begin; idx < end; ++idx) {
    const uint8_t a = static_cast<uint8_t>(idx % n);
    const uint8_t b = static_cast<uint8_t>((idx / n) % n);
    const uint8_t c = static_cast<uint8_t>(idx / (n * n));
    if (bits == 4) {
      sweep_words(static_cast<uint8_t>(a * 0x11u), static_cast<uint8_t>(b * 0x11u),
                  static_cast<uint8_t>(c * 0x11u), cfg, spec, stats);
    } else {
      sweep_words(a, b, c, cfg, spec, stats);
    }
  }
}

}  // namespace

ErrorStats compare_sweep(const MacConfig& cfg, const SweepDomain& domain, unsigned threads) {
  const unsigned nthreads = resolve_threads(threads);
  ErrorStats total;

  if (domain.kind == SweepDomain::Kind::Exhaustive) {
    const uint64_t n = exhaustive_domain_size(cfg);
    if (nthreads <= 1) {
      sweep_index_range(0, n, cfg, total);
      return total;
    }
    std::vector<ErrorStats> parts(nthreads);
    std::vector<std::thread> workers;
    const uint64_t chunk = (n + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
      const uint64_t lo = std::min<uint64_t>(n, t * chunk);
      const uint64_t hi = std::min<uint64_t>(n, lo + chunk);
      workers.emplace_back(
          [&, lo, hi, t] { sweep_index_range(lo, hi, cfg, parts[t]); });
    }
    for (auto& w : workers) w.join();
    for (const auto& p : parts) total.merge(p);  // fixed merge order
    return total;
  }

  // Random domain: one sequential generator fills word batches so results
  // are independent of the worker count; workers split each batch.
  const FormatSpec& spec = cfg.lane_spec();
  std::mt19937_64 rng(domain.seed);
  constexpr uint64_t kBatch = 1ull << 16;
  std::vector<std::array<uint8_t, 3>> batch;
  batch.reserve(kBatch);
  uint64_t remaining = domain.count;
  while (remaining > 0) {
    const uint64_t take = std::min(remaining, kBatch);
    batch.clear();
    for (uint64_t i = 0; i < take; ++i) {
      const uint64_t r = rng();
      batch.push_back({static_cast<uint8_t>(r & 0xFF), static_cast<uint8_t>((r >> 8) & 0xFF),
                       static_cast<uint8_t>((r >> 16) & 0xFF)});
    }
    if (nthreads <= 1) {
      for (const auto& w : batch) sweep_words(w[0], w[1], w[2], cfg, spec, total);
    } else {
      std::vector<ErrorStats> parts(nthreads);
      std::vector<std::thread> workers;
      const uint64_t chunk = (take + nthreads - 1) / nthreads;
      for (unsigned t = 0; t < nthreads; ++t) {
        const uint64_t lo = std::min<uint64_t>(take, t * chunk);
        const uint64_t hi = std::min<uint64_t>(take, lo + chunk);
        workers.emplace_back([&, lo, hi, t] {
          for (uint64_t i = lo; i < hi; ++i)
            sweep_words(batch[i][0], batch[i][1], batch[i][2], cfg, spec, parts[t]);
        });
      }
      for (auto& w : workers) w.join();
      for (const auto& p : parts) total.merge(p);
    }
    remaining -= take;
  }
  return total;
}

uint64_t merged_lane_results(const MacConfig& cfg, const SweepDomain& domain) {
  const uint64_t per_word = cfg.lanes();
  if (domain.kind == SweepDomain::Kind::Exhaustive)
    return exhaustive_domain_size(cfg) * per_word;
  return domain.count * per_word;
}

}  // namespace fpmac
