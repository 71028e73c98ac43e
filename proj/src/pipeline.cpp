// pipeline.cpp - 6-stage shift register over the shared stage functions.

#include "fpmac/pipeline.hpp"

#include <stdexcept>

namespace fpmac {

Pipeline::Pipeline(const MacConfig& cfg, bool record_trace)
    : cfg_(cfg), record_trace_(record_trace) {}

uint64_t Pipeline::issue(PackedWord a, PackedWord b, PackedWord c) {
  if (pending_) throw std::logic_error("pipeline accepts at most one issue per cycle");
  Slot s;
  s.id = next_id_++;
  s.issue_cycle = cycle_;
  s.a = a;
  s.b = b;
  s.c = c;
  pending_ = std::move(s);
  return pending_->id;
}

void Pipeline::step() {
  ++cycle_;

  // Advance the shift register. Last cycle's S5 occupant already retired;
  // it simply drains out here.
  for (int k = 5; k >= 1; --k) {
    stage_[k] = std::move(stage_[k - 1]);
    stage_[k - 1].reset();
  }
  stage_[0] = std::move(pending_);
  pending_.reset();

  // Each in-flight transaction performs exactly the stage it just entered.
  if (stage_[0]) stage_[0]->txn = stage0_decode(stage_[0]->a, stage_[0]->b, stage_[0]->c, cfg_);
  if (stage_[1]) stage1_multiply_compare(stage_[1]->txn, cfg_);
  if (stage_[2]) stage2_align(stage_[2]->txn, cfg_);
  if (stage_[3]) stage3_accumulate(stage_[3]->txn, cfg_);
  if (stage_[4]) stage4_normalize(stage_[4]->txn, cfg_);

  int64_t retired_id = -1;
  uint8_t retired_word = 0;
  if (stage_[5]) {
    const MacResult r = stage5_output(stage_[5]->txn, cfg_);
    retired_.push_back({stage_[5]->id, stage_[5]->issue_cycle, cycle_, r});
    retired_id = static_cast<int64_t>(stage_[5]->id);
    retired_word = r.bits.bits;
  }

  if (record_trace_) {
    TraceRow row;
    row.cycle = cycle_;
    for (unsigned k = 0; k < 6; ++k)
      row.stage[k] = stage_[k] ? static_cast<int64_t>(stage_[k]->id) : -1;
    row.retired_id = retired_id;
    row.retired_word = retired_word;
    trace_.rows.push_back(row);
  }
}

bool Pipeline::busy() const {
  if (pending_) return true;
  for (const auto& s : stage_)
    if (s) return true;
  return false;
}

std::optional<uint64_t> Pipeline::stage_id(unsigned k) const {
  if (k >= 6 || !stage_[k]) return std::nullopt;
  return stage_[k]->id;
}

const MacTxn* Pipeline::stage_txn(unsigned k) const {
  if (k >= 6 || !stage_[k]) return nullptr;
  return &stage_[k]->txn;
}

std::pair<std::vector<MacResult>, ThroughputReport> run_stream(
    const std::vector<StreamInput>& inputs, const MacConfig& cfg, PipelineTrace* trace) {
  Pipeline p(cfg, trace != nullptr);
  size_t i = 0;
  while (i < inputs.size() || p.busy()) {
    if (i < inputs.size()) {
      p.issue(inputs[i].a, inputs[i].b, inputs[i].c);
      ++i;
    }
    p.step();
  }

  std::vector<MacResult> results;
  results.reserve(p.retired().size());
  for (const RetiredMac& r : p.retired()) results.push_back(r.result);

  ThroughputReport rep;
  rep.cycles = p.cycle();
  rep.macs_retired = p.retired().size();
  rep.lanes = cfg.lanes();
  rep.flops = 2ull * rep.lanes * rep.macs_retired;
  rep.flops_per_cycle =
      rep.cycles ? static_cast<double>(rep.flops) / static_cast<double>(rep.cycles) : 0.0;

  if (trace) *trace = p.trace();
  return {std::move(results), rep};
}

}  // namespace fpmac
