#pragma once

#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/reuse.hpp"

namespace mhla {

struct SelectedCopy {
  CopyCandidate cand;
  int layer = -1;  // on-chip destination
};

struct Assignment {
  std::vector<int> home_layer;        // per array index
  std::vector<SelectedCopy> selected; // at most one per array, sorted by candidate id
  Bytes capacity = 0;                 // user constraint on total on-chip bytes

  const SelectedCopy* selection_for_array(int array_index) const;
};

struct CostReport {
  Cycles cpu_cycles = 0;
  Cycles wait_cycles = 0;
  Cycles total_cycles = 0;
  Rat energy_pj;
  Bytes peak_onchip_bytes = 0;
};

Assignment baseline_assignment(const AppModel& model, const PlatformSpec& platform,
                               Bytes capacity);

// Layer whose accesses serve this statement's reads under the assignment.
int serving_layer(const AppModel& model, const Assignment& asg, const PlatformSpec& platform,
                  int stmt);

// Busy cycles of one activation of a statement: compute plus access latencies.
Cycles stmt_busy_cycles(const AppModel& model, const Assignment& asg,
                        const PlatformSpec& platform, int stmt);
// Busy cycles of one full iteration of a loop's body.
Cycles loop_body_busy(const AppModel& model, const Assignment& asg, const PlatformSpec& platform,
                      int loop);
// Per-slot busy cycles of one activation of that slot (entry/back slots are 0).
std::vector<Cycles> slot_busy_cycles(const AppModel& model, const Linearized& lin,
                                     const Assignment& asg, const PlatformSpec& platform);

// Zero-extension placements for an assignment's selected copies.
std::vector<PlacedCopy> placed_copies(const AppModel& model, const Linearized& lin,
                                      const Assignment& asg);

// True when the placements fit the user capacity and every layer's own size.
bool footprint_ok(const AppModel& model, const Linearized& lin, const PlatformSpec& platform,
                  const std::vector<PlacedCopy>& copies, const std::vector<int>& home_layer,
                  Bytes capacity);

Rat assignment_energy(const AppModel& model, const Assignment& asg, const PlatformSpec& platform);

// Analytic pre-extension cost: CPU busy cycles, serialized transfer stalls,
// exact energy, and the zero-extension peak footprint.
CostReport estimate_cost(const AppModel& model, const Linearized& lin, const Assignment& asg,
                         const PlatformSpec& platform);

// Greedy selection: repeatedly take the candidate with the best energy gain
// per on-chip byte that still fits; a strictly better larger candidate may
// replace a smaller one of the same array.
Assignment greedy_assign(const AppModel& model, const Linearized& lin,
                         const PlatformSpec& platform, Bytes capacity);

// Small-instance oracle: enumerate every selection (at most one candidate per
// array, any on-chip layer), minimize energy, tie-break on cycles then ids.
Assignment exhaustive_assign(const AppModel& model, const Linearized& lin,
                             const PlatformSpec& platform, Bytes capacity);

std::string assignment_to_json(const AppModel& model, const PlatformSpec& platform,
                               const Assignment& asg);

}  // namespace mhla
