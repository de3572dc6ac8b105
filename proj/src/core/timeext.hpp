#pragma once

#include <string>
#include <vector>

#include "core/assign.hpp"
#include "core/model.hpp"
#include "core/reuse.hpp"

namespace mhla {

// A schedule region a transfer's issue point may move back across.
struct HideRegion {
  enum class Kind { BackEdgeCrossing, PrecedingSiblingLoop, PrecedingStatement };
  Kind kind = Kind::BackEdgeCrossing;
  Cycles cpu_cycles = 0;        // hiding budget of the region
  Bytes footprint_delta = 0;    // bytes a crossing adds (back edge: one more buffer)
  ItemRef construct;            // crossed loop/statement for the sibling kinds
  std::size_t issue_slot_after = 0;
};

struct BlockTransfer {
  std::string id;  // candidate id
  CopyCandidate copy;
  int layer = -1;
  Bytes steady_bytes = 0;
  Bytes first_bytes = 0;
  Cycles bt_time = 0;     // steady-state transfer time
  Cycles first_time = 0;  // first-activation transfer time
  std::size_t dep_anchor = 0;       // slot of the last producing write (promoted)
  std::size_t anchor_boundary = 0;  // earliest legal issue boundary
  std::size_t nominal_issue = 0;    // slot immediately ahead of the consuming body
  std::vector<HideRegion> freedom;  // nearest region first

  Cycles ext_cycles = 0;
  int ext_steps = 0;
  std::uint64_t back_edge_crossings = 0;
  std::size_t issue_slot = 0;  // static issue slot after extension
  int priority = -1;

  bool fully_extended() const { return ext_cycles >= bt_time; }
  // bt_time / steady_bytes, rendered exactly; "inf" for zero-byte steady state.
  std::string sort_factor_string() const;
};

struct Schedule {
  std::vector<BlockTransfer> bts;  // candidate-id order
  Bytes capacity = 0;
  Bytes peak_bytes = 0;  // analytic footprint including extensions
};

Cycles compute_bt_time(Bytes bytes, const DmaSpec& dma);

// One transfer kind per selected DMA copy (same-layer copies are not DMA).
std::vector<BlockTransfer> build_bt_list(const AppModel& model, const Linearized& lin,
                                         const Assignment& asg, const PlatformSpec& platform);

// Last write of the source array preceding the transfer, promoted to the exit
// of loops that do not enclose the transfer's issue scope. Returns the anchor
// slot; slot 0 when no producer precedes the transfer.
std::size_t dep_analysis(const AppModel& model, const Linearized& lin, const CopyCandidate& cand);

std::vector<HideRegion> freedom_loops(const AppModel& model, const Linearized& lin,
                                      const Assignment& asg, const PlatformSpec& platform,
                                      const BlockTransfer& bt);

// Descending sort factor (most transfer cycles per byte first), ties by id.
std::vector<BlockTransfer> sort_bts(std::vector<BlockTransfer> bts);

// Earliest-deadline-first by nominal issue slot, ties by id; unique 0..n-1.
void dma_priority(std::vector<BlockTransfer>& bts);

// The full time-extension pass over an assignment.
Schedule run_te(const AppModel& model, const Linearized& lin, const Assignment& asg,
                const PlatformSpec& platform, Bytes capacity);

// Same block transfers with every extension left at zero.
Schedule zero_extension_schedule(const AppModel& model, const Linearized& lin,
                                 const Assignment& asg, const PlatformSpec& platform,
                                 Bytes capacity);

// Placement state (issue slots, buffer concurrency) implied by a schedule.
std::vector<PlacedCopy> schedule_placements(const Schedule& schedule);

std::string schedule_to_json(const Schedule& schedule);

}  // namespace mhla
