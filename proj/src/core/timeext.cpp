#include "core/timeext.hpp"

#include <algorithm>

#include "core/errors.hpp"
#include "json.hpp"

namespace mhla {

std::string BlockTransfer::sort_factor_string() const {
  if (steady_bytes == 0) return "inf";
  return Rat(static_cast<std::int64_t>(bt_time), static_cast<std::int64_t>(steady_bytes))
      .to_decimal_string();
}

Cycles compute_bt_time(Bytes bytes, const DmaSpec& dma) {
  return dma.setup_cycles + (bytes + dma.bytes_per_cycle - 1) / dma.bytes_per_cycle;
}

namespace {

struct AnchorInfo {
  std::size_t slot = 0;      // reported anchor slot
  std::size_t boundary = 0;  // earliest boundary the issue may reach
};

AnchorInfo anchor_info(const AppModel& model, const Linearized& lin, const CopyCandidate& cand) {
  std::size_t nominal = nominal_issue_slot(model, lin, cand);
  AnchorInfo info;
  bool contributed = false;
  for (std::size_t si = 0; si < model.stmts.size(); ++si) {
    const AccessStatement& s = model.stmts[si];
    if (s.array_index != cand.array_index || !s.is_writer()) continue;
    // Writes complete at loop exit; promote through every enclosing loop that
    // does not also enclose the transfer's issue scope.
    std::size_t pos = lin.stmt_slot[si];
    for (int loop = s.parent_loop; loop != -1; loop = model.loops[loop].parent) {
      bool encloses_issue = !cand.whole_array() && model.loop_encloses(loop, cand.level_loop);
      if (encloses_issue) break;
      pos = lin.loop_back[loop];
    }
    if (pos >= nominal) continue;  // writer after the transfer constrains nothing
    info.slot = std::max(info.slot, pos);
    contributed = true;
  }
  info.boundary = contributed ? info.slot + 1 : 0;
  return info;
}

}  // namespace

std::size_t dep_analysis(const AppModel& model, const Linearized& lin,
                         const CopyCandidate& cand) {
  return anchor_info(model, lin, cand).slot;
}

std::vector<BlockTransfer> build_bt_list(const AppModel& model, const Linearized& lin,
                                         const Assignment& asg, const PlatformSpec& platform) {
  std::vector<BlockTransfer> bts;
  for (const SelectedCopy& sc : asg.selected) {
    if (sc.layer == asg.home_layer[sc.cand.array_index]) continue;  // not a DMA transfer
    BlockTransfer bt;
    bt.id = sc.cand.id;
    bt.copy = sc.cand;
    bt.layer = sc.layer;
    bt.steady_bytes = sc.cand.steady_bytes;
    bt.first_bytes = sc.cand.first_bytes;
    bt.bt_time = compute_bt_time(bt.steady_bytes, platform.dma);
    bt.first_time = compute_bt_time(bt.first_bytes, platform.dma);
    bt.nominal_issue = nominal_issue_slot(model, lin, sc.cand);
    bt.issue_slot = bt.nominal_issue;
    AnchorInfo anchor = anchor_info(model, lin, sc.cand);
    bt.dep_anchor = anchor.slot;
    bt.anchor_boundary = anchor.boundary;
    bts.push_back(std::move(bt));
  }
  std::sort(bts.begin(), bts.end(),
            [](const BlockTransfer& a, const BlockTransfer& b) { return a.id < b.id; });
  return bts;
}

std::vector<HideRegion> freedom_loops(const AppModel& model, const Linearized& lin,
                                      const Assignment& asg, const PlatformSpec& platform,
                                      const BlockTransfer& bt) {
  std::vector<HideRegion> regions;
  std::size_t pos;  // walk boundary: issue sits just before this slot

  if (!bt.copy.whole_array()) {
    std::size_t entry = lin.loop_entry[bt.copy.level_loop];
    if (bt.anchor_boundary > entry) return regions;  // producer inside the loop span
    HideRegion be;
    be.kind = HideRegion::Kind::BackEdgeCrossing;
    be.cpu_cycles = loop_body_busy(model, asg, platform, bt.copy.level_loop);
    be.footprint_delta = bt.copy.buffer_bytes;
    be.construct = {ItemRef::Kind::Loop, bt.copy.level_loop};
    be.issue_slot_after = entry;
    regions.push_back(be);
    pos = entry;
  } else {
    pos = bt.nominal_issue;
  }

  // Preceding sibling constructs, nearest first, stopping at the dependency
  // anchor or the start of the enclosing body.
  while (pos > 0) {
    const Slot& prev = lin.slots[pos - 1];
    if (prev.kind == SlotKind::LoopEntry) break;  // start of the enclosing body
    if (prev.kind == SlotKind::LoopBack) {
      int loop = prev.node.index;
      std::size_t entry = lin.loop_entry[loop];
      if (bt.anchor_boundary > entry) break;
      HideRegion r;
      r.kind = HideRegion::Kind::PrecedingSiblingLoop;
      r.cpu_cycles = model.loops[loop].trip_count * loop_body_busy(model, asg, platform, loop);
      r.construct = prev.node;
      r.issue_slot_after = entry;
      regions.push_back(r);
      pos = entry;
    } else {
      if (bt.anchor_boundary > pos - 1) break;
      HideRegion r;
      r.kind = HideRegion::Kind::PrecedingStatement;
      r.cpu_cycles = stmt_busy_cycles(model, asg, platform, prev.node.index);
      r.construct = prev.node;
      r.issue_slot_after = pos - 1;
      regions.push_back(r);
      pos = pos - 1;
    }
  }
  return regions;
}

std::vector<BlockTransfer> sort_bts(std::vector<BlockTransfer> bts) {
  std::stable_sort(bts.begin(), bts.end(), [](const BlockTransfer& a, const BlockTransfer& b) {
    // factor = bt_time / steady_bytes, compared by cross multiplication;
    // zero-byte steady state sorts as infinite.
    bool a_inf = a.steady_bytes == 0, b_inf = b.steady_bytes == 0;
    if (a_inf != b_inf) return a_inf;
    if (!a_inf) {
      unsigned __int128 lhs = static_cast<unsigned __int128>(a.bt_time) * b.steady_bytes;
      unsigned __int128 rhs = static_cast<unsigned __int128>(b.bt_time) * a.steady_bytes;
      if (lhs != rhs) return lhs > rhs;
    }
    return a.id < b.id;
  });
  return bts;
}

void dma_priority(std::vector<BlockTransfer>& bts) {
  std::vector<std::size_t> order(bts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bts[a].nominal_issue != bts[b].nominal_issue)
      return bts[a].nominal_issue < bts[b].nominal_issue;
    return bts[a].id < bts[b].id;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    bts[order[rank]].priority = static_cast<int>(rank);
}

namespace {

PlacedCopy placement_of(const BlockTransfer& bt) {
  return {bt.copy, bt.layer, bt.issue_slot, bt.back_edge_crossings};
}

Bytes schedule_peak(const AppModel& model, const Linearized& lin, const Assignment& asg,
                    const PlatformSpec& platform, const std::vector<BlockTransfer>& bts) {
  std::vector<PlacedCopy> copies;
  for (const BlockTransfer& bt : bts) copies.push_back(placement_of(bt));
  return peak_footprint(lifetime_intervals(model, lin, copies, asg.home_layer, platform));
}

}  // namespace

Schedule run_te(const AppModel& model, const Linearized& lin, const Assignment& asg,
                const PlatformSpec& platform, Bytes capacity) {
  Schedule sched;
  sched.capacity = capacity;
  sched.bts = build_bt_list(model, lin, asg, platform);
  for (BlockTransfer& bt : sched.bts)
    bt.freedom = freedom_loops(model, lin, asg, platform, bt);

  // Greedy pass in descending sort-factor order; every BT sees the footprint
  // of extensions accepted before it.
  std::vector<BlockTransfer> order = sort_bts(sched.bts);
  for (const BlockTransfer& pick : order) {
    BlockTransfer* bt = nullptr;
    for (BlockTransfer& b : sched.bts)
      if (b.id == pick.id) bt = &b;
    if (!bt) throw InternalError("transfer lost during sorting: " + pick.id);
    for (const HideRegion& region : bt->freedom) {
      BlockTransfer tentative = *bt;
      if (region.kind == HideRegion::Kind::BackEdgeCrossing)
        tentative.back_edge_crossings += 1;
      else
        tentative.issue_slot = region.issue_slot_after;

      std::vector<PlacedCopy> copies;
      for (const BlockTransfer& b : sched.bts)
        copies.push_back(placement_of(b.id == bt->id ? tentative : b));
      if (!footprint_ok(model, lin, platform, copies, asg.home_layer, capacity))
        break;  // not valid; no further actions for this BT

      bt->back_edge_crossings = tentative.back_edge_crossings;
      bt->issue_slot = tentative.issue_slot;
      bt->ext_cycles += region.cpu_cycles;
      bt->ext_steps += 1;
      if (bt->fully_extended()) break;
    }
  }

  dma_priority(sched.bts);
  sched.peak_bytes = schedule_peak(model, lin, asg, platform, sched.bts);
  return sched;
}

Schedule zero_extension_schedule(const AppModel& model, const Linearized& lin,
                                 const Assignment& asg, const PlatformSpec& platform,
                                 Bytes capacity) {
  Schedule sched;
  sched.capacity = capacity;
  sched.bts = build_bt_list(model, lin, asg, platform);
  for (BlockTransfer& bt : sched.bts)
    bt.freedom = freedom_loops(model, lin, asg, platform, bt);
  dma_priority(sched.bts);
  sched.peak_bytes = schedule_peak(model, lin, asg, platform, sched.bts);
  return sched;
}

std::vector<PlacedCopy> schedule_placements(const Schedule& schedule) {
  std::vector<PlacedCopy> copies;
  for (const BlockTransfer& bt : schedule.bts) copies.push_back(placement_of(bt));
  return copies;
}

std::string schedule_to_json(const Schedule& schedule) {
  nlohmann::ordered_json bts = nlohmann::ordered_json::array();
  for (const BlockTransfer& bt : schedule.bts) {
    bts.push_back({{"id", bt.id},
                   {"bt_time", bt.bt_time},
                   {"sort_factor", bt.sort_factor_string()},
                   {"ext_steps", bt.ext_steps},
                   {"ext_cycles", bt.ext_cycles},
                   {"issue_slot", bt.issue_slot},
                   {"priority", bt.priority}});
  }
  nlohmann::ordered_json j = {{"bts", std::move(bts)}};
  return j.dump(2) + "\n";
}

}  // namespace mhla
