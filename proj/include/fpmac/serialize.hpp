#pragma once
// Frozen machine-readable output schemas (see docs/FORMATS.md) plus hex and
// vector-file parsing shared by the CLI and tests.

#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fpmac/mac_datapath.hpp"
#include "fpmac/oracle.hpp"
#include "fpmac/pipeline.hpp"

namespace fpmac {

inline constexpr const char* kVersion = "0.1.0";

std::string hex_byte(uint8_t b);  // "0x4E"

// Parses "0x4E" / "4E" / "0b01001110"; rejects values wider than max_bits.
uint8_t parse_hex_byte(const std::string& text, unsigned max_bits);

// Input vector file: one whitespace-separated hex pair per line, with '#'
// starting a comment. Throws std::runtime_error with the line number.
std::vector<std::pair<uint8_t, uint8_t>> read_vector_file(std::istream& in);

nlohmann::json mac_result_json(const MacResult& r, const MacConfig& cfg, PackedWord a,
                               PackedWord b, PackedWord c);

nlohmann::json error_stats_json(const ErrorStats& stats, const MacConfig& cfg,
                                const SweepDomain& domain);
void write_error_stats_csv(std::ostream& os, const ErrorStats& stats, const MacConfig& cfg,
                           const SweepDomain& domain);

nlohmann::json throughput_json(const ThroughputReport& rep, const MacConfig& cfg,
                               std::optional<double> freq_ghz);

void write_trace_csv(std::ostream& os, const PipelineTrace& trace);
void write_trace_jsonl(std::ostream& os, const PipelineTrace& trace);

}  // namespace fpmac
