// serialize.cpp - output schemas and input parsing.

#include "fpmac/serialize.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fpmac {

namespace {

std::string domain_name(const SweepDomain& d) {
  return d.kind == SweepDomain::Kind::Exhaustive ? "exhaustive" : "random";
}

nlohmann::json flags_json(const FpFlags& f) {
  return {{"overflow", f.overflow},
          {"underflow", f.underflow},
          {"invalid", f.invalid},
          {"inexact", f.inexact}};
}

}  // namespace

std::string hex_byte(uint8_t b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", b);
  return buf;
}

uint8_t parse_hex_byte(const std::string& text, unsigned max_bits) {
  std::string body = text;
  int base = 16;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    body = body.substr(2);
  } else if (body.size() > 2 && body[0] == '0' && (body[1] == 'b' || body[1] == 'B')) {
    body = body.substr(2);
    base = 2;
  }
  if (body.empty()) throw std::invalid_argument("empty operand: '" + text + "'");
  size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(body, &pos, base);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed operand: '" + text + "'");
  }
  if (pos != body.size()) throw std::invalid_argument("malformed operand: '" + text + "'");
  if (max_bits < 8 && v >= (1ul << max_bits))
    throw std::invalid_argument("operand '" + text + "' does not fit " +
                                std::to_string(max_bits) + " bits");
  if (v > 0xFFul)
    throw std::invalid_argument("operand '" + text + "' does not fit 8 bits");
  return static_cast<uint8_t>(v);
}

std::vector<std::pair<uint8_t, uint8_t>> read_vector_file(std::istream& in) {
  std::vector<std::pair<uint8_t, uint8_t>> pairs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string ta, tb, extra;
    if (!(ls >> ta)) continue;  // blank or comment-only
    if (!(ls >> tb) || (ls >> extra))
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected exactly one hex pair");
    try {
      pairs.emplace_back(parse_hex_byte(ta, 8), parse_hex_byte(tb, 8));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

nlohmann::json mac_result_json(const MacResult& r, const MacConfig& cfg, PackedWord a,
                               PackedWord b, PackedWord c) {
  const FormatSpec& spec = cfg.lane_spec();
  nlohmann::json lanes = nlohmann::json::array();
  for (unsigned ln = 0; ln < r.lanes; ++ln) {
    const uint8_t bits = lane_bits(r, ln);
    const DecodedFloat d = decode(bits, spec);
    lanes.push_back({{"lane", ln},
                     {"bits", hex_byte(bits)},
                     {"value", decimal_string(d, spec)},
                     {"class", std::string(fp_class_name(d.cls))},
                     {"flags", flags_json(r.flags[ln])}});
  }
  return {{"version", kVersion},
          {"kind", "mac"},
          {"mode", std::string(mac_mode_name(cfg.mode))},
          {"guard_bits", cfg.guard_bits},
          {"relu", cfg.relu},
          {"a", hex_byte(a.bits)},
          {"b", hex_byte(b.bits)},
          {"c", hex_byte(c.bits)},
          {"word", hex_byte(r.bits.bits)},
          {"lanes", lanes}};
}

nlohmann::json error_stats_json(const ErrorStats& stats, const MacConfig& cfg,
                                const SweepDomain& domain) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [ulp, n] : stats.histogram) hist[std::to_string(ulp)] = n;
  nlohmann::json j = {{"version", kVersion},
                      {"kind", "error_stats"},
                      {"mode", std::string(mac_mode_name(cfg.mode))},
                      {"guard_bits", cfg.guard_bits},
                      {"relu", cfg.relu},
                      {"domain", domain_name(domain)},
                      {"samples", stats.samples},
                      {"max_ulp", stats.max_ulp},
                      {"mismatch_count", stats.mismatch_count},
                      {"mean_abs", stats.mean_abs()},
                      {"histogram", hist}};
  if (domain.kind == SweepDomain::Kind::Random) {
    j["seed"] = domain.seed;
    j["count"] = domain.count;
  }
  return j;
}

void write_error_stats_csv(std::ostream& os, const ErrorStats& stats, const MacConfig& cfg,
                           const SweepDomain& domain) {
  char mean[64];
  std::snprintf(mean, sizeof mean, "%.9g", stats.mean_abs());
  os << "# fpmac " << kVersion << " error_stats mode=" << mac_mode_name(cfg.mode)
     << " guard=" << cfg.guard_bits << " relu=" << (cfg.relu ? 1 : 0)
     << " domain=" << domain_name(domain);
  if (domain.kind == SweepDomain::Kind::Random)
    os << " count=" << domain.count << " seed=" << domain.seed;
  os << " samples=" << stats.samples << " max_ulp=" << stats.max_ulp
     << " mismatch=" << stats.mismatch_count << " mean_abs=" << mean << "\n";
  os << "ulp,count\n";
  for (const auto& [ulp, n] : stats.histogram) os << ulp << "," << n << "\n";
}

nlohmann::json throughput_json(const ThroughputReport& rep, const MacConfig& cfg,
                               std::optional<double> freq_ghz) {
  nlohmann::json j = {{"version", kVersion},
                      {"kind", "throughput"},
                      {"mode", std::string(mac_mode_name(cfg.mode))},
                      {"lanes", rep.lanes},
                      {"cycles", rep.cycles},
                      {"macs_retired", rep.macs_retired},
                      {"flops", rep.flops},
                      {"flops_per_cycle", rep.flops_per_cycle}};
  if (freq_ghz) {
    j["freq_ghz"] = *freq_ghz;
    j["gflops"] = rep.flops_per_cycle * *freq_ghz;
  }
  return j;
}

void write_trace_csv(std::ostream& os, const PipelineTrace& trace) {
  os << "# fpmac " << kVersion << " pipeline_trace\n";
  os << "cycle,s0,s1,s2,s3,s4,s5,retired_id,retired_word\n";
  for (const TraceRow& row : trace.rows) {
    os << row.cycle;
    for (unsigned k = 0; k < 6; ++k) {
      os << ',';
      if (row.stage[k] >= 0) os << row.stage[k];
    }
    os << ',';
    if (row.retired_id >= 0) os << row.retired_id;
    os << ',';
    if (row.retired_id >= 0) os << hex_byte(row.retired_word);
    os << '\n';
  }
}

void write_trace_jsonl(std::ostream& os, const PipelineTrace& trace) {
  for (const TraceRow& row : trace.rows) {
    nlohmann::json j = {{"version", kVersion},
                        {"cycle", row.cycle},
                        {"stages", row.stage}};
    if (row.retired_id >= 0)
      j["retired"] = {{"id", row.retired_id}, {"word", hex_byte(row.retired_word)}};
    os << j.dump() << '\n';
  }
}

}  // namespace fpmac
