#pragma once

#include <string>
#include <vector>

#include "core/assign.hpp"
#include "core/model.hpp"
#include "core/timeext.hpp"

namespace mhla {

struct TraceEvent {
  Cycles cycle = 0;
  std::string event;
  std::string object;

  bool operator==(const TraceEvent&) const = default;
};

struct ActivationStats {
  Cycles issue_time = 0;
  Cycles start_time = 0;
  Cycles done_time = 0;
  Cycles wait = 0;
  bool contended = false;  // had to queue behind another transfer
};

struct BtStats {
  std::string id;
  Cycles wait_total = 0;
  std::vector<ActivationStats> acts;
};

struct SimReport {
  Cycles total_cycles = 0;
  Cycles cpu_busy_cycles = 0;
  std::vector<BtStats> bts;  // aligned with the schedule's BT order
  Rat energy_pj;
  Bytes observed_peak_onchip_bytes = 0;
  std::vector<TraceEvent> trace;

  Cycles wait_cycles() const {
    Cycles w = 0;
    for (const BtStats& b : bts) w += b.wait_total;
    return w;
  }
  const BtStats* stats_for(const std::string& id) const {
    for (const BtStats& b : bts)
      if (b.id == id) return &b;
    return nullptr;
  }
};

// Cycle-accurate walk of the linearized program against a single-channel,
// non-preemptive DMA engine. Unextended transfers block at their issue point;
// extended transfers run ahead and the CPU stalls only at first use.
SimReport simulate(const AppModel& model, const Linearized& lin, const Assignment& asg,
                   const Schedule& schedule, const PlatformSpec& platform,
                   bool with_trace = false);

struct VerifyResult {
  bool pass = true;
  std::vector<std::string> diagnostics;
};

// Re-simulates and checks the schedule's promises: capacity respected,
// dependencies honored, extension state consistent, energy matching the
// analytic model, and hidden transfers actually hidden.
VerifyResult verify_schedule(const AppModel& model, const Linearized& lin, const Assignment& asg,
                             const Schedule& schedule, const PlatformSpec& platform,
                             Bytes capacity);

std::string trace_to_csv(const std::vector<TraceEvent>& trace);

}  // namespace mhla
