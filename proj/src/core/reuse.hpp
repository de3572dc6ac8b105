#pragma once

#include <string>
#include <vector>

#include "core/model.hpp"

namespace mhla {

// A reuse buffer holding the window of an array touched within one iteration
// of a chosen loop level. level_loop == -1 marks the whole-array variant that
// is filled once ahead of its first reader.
struct CopyCandidate {
  std::string id;
  int array_index = -1;
  int stmt_index = -1;   // -1 for the whole-array candidate
  int level_loop = -1;   // loop arena index; -1 for whole-array
  Bytes buffer_bytes = 0;
  Bytes steady_bytes = 0;  // new-window bytes per steady-state activation
  Bytes first_bytes = 0;   // full buffer on the first activation
  std::uint64_t activations = 1;
  std::uint64_t reads_absorbed = 0;

  bool whole_array() const { return level_loop < 0; }
  // DMA traffic across all activations: one full fill plus steady refills.
  Bytes bytes_moved() const { return first_bytes + (activations - 1) * steady_bytes; }

  bool operator==(const CopyCandidate&) const = default;
};

// One candidate per (reading statement, declared window level) plus a
// whole-array candidate per array. Candidates whose fill could not be ordered
// against writers of the source (writer inside the serving scope) are not
// emitted. Per array, ordered smallest buffer first.
std::vector<std::vector<CopyCandidate>> enumerate_candidates(const AppModel& model,
                                                             const Linearized& lin);

// Where a candidate's single fill (whole-array) or per-iteration fill chain
// nominally begins, as a static slot index.
std::size_t nominal_issue_slot(const AppModel& model, const Linearized& lin,
                               const CopyCandidate& cand);
// Last slot of the region the buffer stays live in.
std::size_t candidate_end_slot(const AppModel& model, const Linearized& lin,
                               const CopyCandidate& cand);

struct LiveInterval {
  std::string object;
  std::size_t start_slot = 0;
  std::size_t end_slot = 0;  // inclusive
  Bytes bytes = 0;
  std::uint64_t concurrent_buffers = 1;

  bool operator==(const LiveInterval&) const = default;
};

// A placed copy with its scheduling state; assign produces these with zero
// extension, timeext updates issue_slot / back_edge_crossings.
struct PlacedCopy {
  CopyCandidate cand;
  int layer = -1;
  std::size_t issue_slot = 0;
  std::uint64_t back_edge_crossings = 0;
};

// On-chip live intervals for a set of placed copies plus any arrays whose home
// layer is on-chip. Off-chip objects contribute nothing.
std::vector<LiveInterval> lifetime_intervals(const AppModel& model, const Linearized& lin,
                                             const std::vector<PlacedCopy>& copies,
                                             const std::vector<int>& home_layer,
                                             const PlatformSpec& platform);

Bytes peak_footprint(const std::vector<LiveInterval>& intervals);

std::string intervals_to_csv(const std::vector<LiveInterval>& intervals);

}  // namespace mhla
