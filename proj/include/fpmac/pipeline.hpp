#pragma once
// Cycle-level model of the fully pipelined 6-stage PE: one issue per cycle,
// fixed 6-cycle latency, no stalls or hazards. Issuing queues a transaction;
// it enters S0 on the next step and retires when it completes S5, exactly
// 6 cycles after issue. A drained stream of N back-to-back issues therefore
// spans N + 6 cycles including fill and the final output-register transfer.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fpmac/mac_datapath.hpp"

namespace fpmac {

struct RetiredMac {
  uint64_t id = 0;
  uint64_t issue_cycle = 0;
  uint64_t retire_cycle = 0;  // == issue_cycle + 6
  MacResult result;
};

// One record per simulated cycle: stage occupancy by transaction id
// (-1 = bubble) and the retirement, if any.
struct TraceRow {
  uint64_t cycle = 0;
  std::array<int64_t, 6> stage{{-1, -1, -1, -1, -1, -1}};
  int64_t retired_id = -1;
  uint8_t retired_word = 0;
};

struct PipelineTrace {
  std::vector<TraceRow> rows;
};

class Pipeline {
 public:
  explicit Pipeline(const MacConfig& cfg, bool record_trace = false);

  // At most one issue per cycle (throws std::logic_error otherwise).
  uint64_t issue(PackedWord a, PackedWord b, PackedWord c);
  void step();

  bool busy() const;  // pending input or any occupied stage register
  uint64_t cycle() const { return cycle_; }
  const MacConfig& config() const { return cfg_; }
  const std::vector<RetiredMac>& retired() const { return retired_; }
  const PipelineTrace& trace() const { return trace_; }

  // Stage-register introspection (tests and the --trace CLI path).
  std::optional<uint64_t> stage_id(unsigned k) const;
  const MacTxn* stage_txn(unsigned k) const;

 private:
  struct Slot {
    uint64_t id = 0;
    uint64_t issue_cycle = 0;
    PackedWord a, b, c;
    MacTxn txn;
  };

  MacConfig cfg_;
  bool record_trace_;
  std::optional<Slot> pending_;
  std::array<std::optional<Slot>, 6> stage_;
  uint64_t cycle_ = 0;
  uint64_t next_id_ = 0;
  std::vector<RetiredMac> retired_;
  PipelineTrace trace_;
};

struct StreamInput {
  PackedWord a, b, c;
};

// Throughput accounting: 2 FLOPs (multiply + add) per retired MAC per lane,
// so dual-FP4 modes deliver exactly twice the FP8 steady-state rate.
struct ThroughputReport {
  uint64_t cycles = 0;
  uint64_t macs_retired = 0;
  uint64_t flops = 0;  // 2 * lanes * macs_retired
  unsigned lanes = 1;
  double flops_per_cycle = 0.0;
};

// Feeds the stream one issue per cycle and drains. Retired results come
// back in issue order; the report includes fill/drain overhead.
std::pair<std::vector<MacResult>, ThroughputReport> run_stream(
    const std::vector<StreamInput>& inputs, const MacConfig& cfg, PipelineTrace* trace = nullptr);

}  // namespace fpmac
