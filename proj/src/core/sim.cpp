#include "core/sim.hpp"

#include <algorithm>
#include <map>

#include "core/errors.hpp"

namespace mhla {

namespace {

struct BtRuntime {
  // static
  std::string id;
  int level = -1;  // level loop; -1 = whole-array
  std::uint64_t trip = 1;
  bool sync = true;
  Cycles dur_first = 0;
  Cycles dur_steady = 0;
  int priority = 0;
  Bytes buffer_bytes = 0;
  std::size_t hook_slot = 0;       // async issue point / sync whole-array issue
  std::size_t release_slot = 0;    // whole-array: back slot of the serving region
  std::uint64_t total_acts = 1;
  // dynamic
  std::uint64_t contexts_seen = 0;
  std::uint64_t context_base = 0;
  std::uint64_t issued = 0;  // acts issued so far (issued in index order)
};

struct PendingTransfer {
  int bt = -1;
  std::uint64_t act = 0;
  Cycles issue = 0;
  Cycles duration = 0;
  int priority = 0;
  std::uint64_t seq = 0;
};

class Simulator {
 public:
  Simulator(const AppModel& model, const Linearized& lin, const Assignment& asg,
            const Schedule& schedule, const PlatformSpec& platform, bool with_trace)
      : model_(model), lin_(lin), asg_(asg), platform_(platform), with_trace_(with_trace) {
    busy_ = slot_busy_cycles(model, lin, asg, platform);

    // The schedule must describe exactly this assignment's DMA copies.
    auto expected = build_bt_list(model, lin, asg, platform);
    if (expected.size() != schedule.bts.size())
      throw InputError("schedule does not match the assignment's transfer list");
    for (const BlockTransfer& bt : schedule.bts) {
      bool known = false;
      for (const BlockTransfer& e : expected) known = known || e.id == bt.id;
      if (!known) throw InputError("schedule references unknown transfer '" + bt.id + "'");
    }

    bts_.reserve(schedule.bts.size());
    report_.bts.resize(schedule.bts.size());
    serving_by_stmt_.resize(model.stmts.size());
    hooks_before_.resize(lin.slots.size());
    release_hooks_.resize(lin.slots.size());
    for (std::size_t i = 0; i < schedule.bts.size(); ++i) {
      const BlockTransfer& bt = schedule.bts[i];
      BtRuntime rt;
      rt.id = bt.id;
      rt.level = bt.copy.level_loop;
      rt.trip = rt.level >= 0 ? model.loops[rt.level].trip_count : 1;
      rt.sync = bt.ext_steps == 0;
      rt.dur_first = compute_bt_time(bt.first_bytes, platform.dma);
      rt.dur_steady = compute_bt_time(bt.steady_bytes, platform.dma);
      rt.priority = bt.priority;
      rt.buffer_bytes = bt.copy.buffer_bytes;
      rt.total_acts = bt.copy.activations;
      rt.hook_slot = bt.issue_slot;
      rt.release_slot = candidate_end_slot(model, lin, bt.copy);
      report_.bts[i].id = bt.id;
      report_.bts[i].acts.resize(rt.total_acts);

      if (bt.copy.whole_array()) {
        hooks_before_[rt.hook_slot].push_back(static_cast<int>(i));
        release_hooks_[rt.release_slot].push_back(static_cast<int>(i));
        for (std::size_t si = 0; si < model.stmts.size(); ++si) {
          const AccessStatement& s = model.stmts[si];
          if (s.array_index == bt.copy.array_index && s.reads_per_iter > 0 && !s.is_writer())
            serving_by_stmt_[si].push_back(static_cast<int>(i));
        }
      } else {
        if (!rt.sync) hooks_before_[rt.hook_slot].push_back(static_cast<int>(i));
        serving_by_stmt_[bt.copy.stmt_index].push_back(static_cast<int>(i));
      }
      bts_.push_back(std::move(rt));
    }

    // On-chip home arrays: live across their analytic slot window.
    for (std::size_t ai = 0; ai < model.arrays.size(); ++ai) {
      if (!platform.layers[asg.home_layer[ai]].on_chip) continue;
      ArrayWindow w;
      w.array = static_cast<int>(ai);
      w.bytes = model.arrays[ai].total_bytes();
      std::size_t start = lin.slots.size(), end = 0;
      for (std::size_t si = 0; si < model.stmts.size(); ++si) {
        const AccessStatement& s = model.stmts[si];
        if (s.array_index != static_cast<int>(ai)) continue;
        if (s.is_writer()) start = std::min(start, lin.stmt_slot[si]);
        if (s.reads_per_iter > 0) end = std::max(end, lin.stmt_slot[si]);
      }
      if (start == lin.slots.size()) start = 0;
      if (end < start) end = start;
      w.start_slot = start;
      w.end_slot = end;
      w.end_visits_left = slot_visit_count(end);
      array_windows_.push_back(w);
    }

    cur_iter_.resize(model.loops.size(), 0);
  }

  SimReport run() {
    for (const ItemRef& item : model_.root) exec_item(item);
    while (!pending_.empty()) serve_one();  // finish the channel's tail work
    if (live_bytes_ != 0) throw InternalError("buffer accounting leak");

    report_.total_cycles = now_;
    report_.cpu_busy_cycles = busy_total_;
    Cycles waits = 0;
    for (BtStats& b : report_.bts) {
      b.wait_total = 0;
      for (const ActivationStats& a : b.acts) b.wait_total += a.wait;
      waits += b.wait_total;
    }
    if (report_.cpu_busy_cycles + waits != report_.total_cycles)
      throw InternalError("cycle accounting mismatch");
    report_.energy_pj = assignment_energy(model_, asg_, platform_);
    report_.observed_peak_onchip_bytes = observed_peak_;
    if (with_trace_) {
      std::stable_sort(trace_.begin(), trace_.end(),
                       [](const TraceEvent& a, const TraceEvent& b) { return a.cycle < b.cycle; });
      report_.trace = std::move(trace_);
    }
    return std::move(report_);
  }

 private:
  struct ArrayWindow {
    int array = -1;
    Bytes bytes = 0;
    std::size_t start_slot = 0;
    std::size_t end_slot = 0;
    std::uint64_t end_visits_left = 0;
    bool live = false;
  };

  std::uint64_t slot_visit_count(std::size_t slot) const {
    const Slot& s = lin_.slots[slot];
    if (s.kind == SlotKind::Statement) return model_.stmts[s.node.index].total_iterations;
    const LoopInfo& l = model_.loops[s.node.index];
    return l.enclosing_iterations * l.trip_count;
  }

  void trace(Cycles cycle, const char* event, const std::string& object) {
    if (with_trace_) trace_.push_back({cycle, event, object});
  }

  static std::string act_name(const BtRuntime& rt, std::uint64_t act) {
    return rt.id + "#" + std::to_string(act);
  }

  void live_add(Bytes bytes) {
    live_bytes_ += bytes;
    observed_peak_ = std::max(observed_peak_, live_bytes_);
  }
  void live_remove(Bytes bytes) {
    if (bytes > live_bytes_) throw InternalError("buffer accounting underflow");
    live_bytes_ -= bytes;
  }

  ActivationStats& act_stats(int bt, std::uint64_t act) { return report_.bts[bt].acts[act]; }

  void issue(int b, std::uint64_t act) {
    BtRuntime& rt = bts_[b];
    if (act != rt.issued) throw InternalError("out-of-order issue for " + rt.id);
    rt.issued += 1;
    Cycles dur = act == 0 ? rt.dur_first : rt.dur_steady;
    pending_.push_back({b, act, now_, dur, rt.priority, seq_++});
    act_stats(b, act).issue_time = now_;
    trace(now_, "issue", act_name(rt, act));
    live_add(rt.buffer_bytes);
  }

  // Serves the highest-priority transfer the channel can legally start next.
  void serve_one() {
    Cycles t = channel_free_;
    bool any = false;
    for (const PendingTransfer& p : pending_) any = any || p.issue <= t;
    if (!any) {
      Cycles earliest = pending_.front().issue;
      for (const PendingTransfer& p : pending_) earliest = std::min(earliest, p.issue);
      t = earliest;
    }
    std::size_t best = pending_.size();
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (pending_[i].issue > t) continue;
      if (best == pending_.size() || pending_[i].priority < pending_[best].priority ||
          (pending_[i].priority == pending_[best].priority && pending_[i].seq < pending_[best].seq))
        best = i;
    }
    PendingTransfer p = pending_[best];
    pending_.erase(pending_.begin() + best);
    Cycles start = std::max(t, p.issue);
    Cycles done = start + p.duration;
    channel_free_ = done;
    ActivationStats& st = act_stats(p.bt, p.act);
    st.start_time = start;
    st.done_time = done;
    st.contended = start > p.issue;
    completed_[(static_cast<std::uint64_t>(p.bt) << 40) | p.act] = done;
    trace(start, "dma_start", act_name(bts_[p.bt], p.act));
    trace(done, "dma_done", act_name(bts_[p.bt], p.act));
  }

  Cycles completion_of(int b, std::uint64_t act) {
    std::uint64_t key = (static_cast<std::uint64_t>(b) << 40) | act;
    while (!completed_.count(key)) {
      if (pending_.empty())
        throw InternalError("transfer " + act_name(bts_[b], act) + " consumed but never issued");
      serve_one();
    }
    return completed_[key];
  }

  void stall_until(int b, std::uint64_t act, Cycles done) {
    if (done <= now_) return;
    ActivationStats& st = act_stats(b, act);
    st.wait += done - now_;
    trace(now_, "stall_begin", act_name(bts_[b], act));
    trace(done, "stall_end", act_name(bts_[b], act));
    now_ = done;
  }

  void fire_hooks_before(std::size_t slot) {
    for (int b : hooks_before_[slot]) {
      BtRuntime& rt = bts_[b];
      std::uint64_t act = rt.level >= 0 ? rt.contexts_seen * rt.trip : 0;
      if (act >= rt.total_acts) continue;
      if (rt.sync) {
        // Unextended whole-array fill: the CPU blocks through the transfer.
        issue(b, act);
        stall_until(b, act, completion_of(b, act));
      } else {
        issue(b, act);
      }
    }
  }

  void visit_slot_windows(std::size_t slot) {
    for (ArrayWindow& w : array_windows_) {
      if (!w.live && w.start_slot == slot && w.end_visits_left > 0) {
        w.live = true;
        live_add(w.bytes);
      }
      if (w.end_slot == slot && w.end_visits_left > 0) {
        w.end_visits_left -= 1;
        if (w.end_visits_left == 0 && w.live) {
          w.live = false;
          live_remove(w.bytes);
        }
      }
    }
  }

  void exec_item(const ItemRef& item) {
    std::size_t first_slot = item.kind == ItemRef::Kind::Loop ? lin_.loop_entry[item.index]
                                                              : lin_.stmt_slot[item.index];
    fire_hooks_before(first_slot);
    if (item.kind == ItemRef::Kind::Loop)
      exec_loop(item.index);
    else
      exec_stmt(item.index);
  }

  void exec_loop(int loop) {
    const LoopInfo& l = model_.loops[loop];
    visit_slot_windows(lin_.loop_entry[loop]);

    std::vector<int> here;  // transfers whose level loop is this one
    for (std::size_t b = 0; b < bts_.size(); ++b)
      if (bts_[b].level == loop) here.push_back(static_cast<int>(b));
    for (int b : here) {
      bts_[b].context_base = bts_[b].contexts_seen * bts_[b].trip;
      bts_[b].contexts_seen += 1;
    }

    for (std::uint64_t it = 0; it < l.trip_count; ++it) {
      cur_iter_[loop] = it;
      for (int b : here) {
        BtRuntime& rt = bts_[b];
        std::uint64_t act = rt.context_base + it;
        if (rt.sync) {
          issue(b, act);
          stall_until(b, act, completion_of(b, act));
        } else if (it + 1 < l.trip_count) {
          issue(b, rt.context_base + it + 1);  // prefetch the next iteration
        }
      }
      for (const ItemRef& item : l.body) exec_item(item);
      for (int b : here) {
        std::uint64_t act = bts_[b].context_base + it;
        if (act < bts_[b].issued) live_remove(bts_[b].buffer_bytes);
      }
    }
    cur_iter_[loop] = 0;

    visit_slot_windows(lin_.loop_back[loop]);
    for (int b : release_hooks_[lin_.loop_back[loop]]) {
      if (bts_[b].issued > 0) live_remove(bts_[b].buffer_bytes);
    }
  }

  void exec_stmt(int stmt) {
    std::size_t slot = lin_.stmt_slot[stmt];
    visit_slot_windows(slot);
    for (int b : serving_by_stmt_[stmt]) {
      BtRuntime& rt = bts_[b];
      std::uint64_t act = rt.level >= 0 ? rt.context_base + cur_iter_[rt.level] : 0;
      if (act >= rt.issued)
        throw InternalError("transfer " + act_name(rt, act) + " consumed before issue");
      if (!rt.sync) stall_until(b, act, completion_of(b, act));
    }
    Cycles cycles = busy_[slot];
    now_ += cycles;
    busy_total_ += cycles;
  }

  const AppModel& model_;
  const Linearized& lin_;
  const Assignment& asg_;
  const PlatformSpec& platform_;
  bool with_trace_;

  std::vector<Cycles> busy_;
  std::vector<BtRuntime> bts_;
  std::vector<std::vector<int>> serving_by_stmt_;
  std::vector<std::vector<int>> hooks_before_;
  std::vector<std::vector<int>> release_hooks_;
  std::vector<ArrayWindow> array_windows_;
  std::vector<std::uint64_t> cur_iter_;

  Cycles now_ = 0;
  Cycles busy_total_ = 0;
  Cycles channel_free_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<PendingTransfer> pending_;
  std::map<std::uint64_t, Cycles> completed_;
  Bytes live_bytes_ = 0;
  Bytes observed_peak_ = 0;
  std::vector<TraceEvent> trace_;
  SimReport report_;
};

}  // namespace

SimReport simulate(const AppModel& model, const Linearized& lin, const Assignment& asg,
                   const Schedule& schedule, const PlatformSpec& platform, bool with_trace) {
  Simulator sim(model, lin, asg, schedule, platform, with_trace);
  return sim.run();
}

VerifyResult verify_schedule(const AppModel& model, const Linearized& lin, const Assignment& asg,
                             const Schedule& schedule, const PlatformSpec& platform,
                             Bytes capacity) {
  VerifyResult result;
  auto complain = [&](const std::string& msg) {
    result.pass = false;
    result.diagnostics.push_back(msg);
  };

  for (const BlockTransfer& bt : schedule.bts) {
    if (bt.issue_slot < bt.dep_anchor && bt.anchor_boundary > 0)
      complain("dependency violated: " + bt.id + " issues at slot " +
               std::to_string(bt.issue_slot) + " before anchor slot " +
               std::to_string(bt.dep_anchor));
    Cycles expect = 0;
    for (int i = 0; i < bt.ext_steps && i < static_cast<int>(bt.freedom.size()); ++i)
      expect += bt.freedom[i].cpu_cycles;
    if (bt.ext_steps > static_cast<int>(bt.freedom.size()) || bt.ext_cycles != expect)
      complain("extension state inconsistent for " + bt.id);
  }

  Bytes analytic = peak_footprint(
      lifetime_intervals(model, lin, schedule_placements(schedule), asg.home_layer, platform));
  if (analytic > capacity)
    complain("capacity exceeded: footprint " + std::to_string(analytic) + " > " +
             std::to_string(capacity));

  SimReport sim;
  try {
    sim = simulate(model, lin, asg, schedule, platform, false);
  } catch (const std::exception& e) {
    complain(std::string("simulation failed: ") + e.what());
    return result;
  }

  if (sim.observed_peak_onchip_bytes > capacity)
    complain("capacity exceeded: observed " + std::to_string(sim.observed_peak_onchip_bytes) +
             " > " + std::to_string(capacity));
  if (sim.observed_peak_onchip_bytes > analytic)
    complain("observed footprint above analytic bound");

  Rat expected_energy = assignment_energy(model, asg, platform);
  if (sim.energy_pj != expected_energy) complain("energy mismatch against the analytic model");

  // An uncontended activation can never wait longer than its own transfer.
  for (std::size_t i = 0; i < schedule.bts.size(); ++i) {
    const BlockTransfer& bt = schedule.bts[i];
    const BtStats& st = sim.bts[i];
    for (std::size_t act = 0; act < st.acts.size(); ++act) {
      const ActivationStats& a = st.acts[act];
      Cycles own = act == 0 ? bt.first_time : bt.bt_time;
      if (!a.contended && a.wait > own)
        complain("wait above transfer time: " + bt.id + "#" + std::to_string(act) + " waited " +
                 std::to_string(a.wait) + " > " + std::to_string(own));
    }
  }

  // A transfer whose back-edge window covers its own time must be invisible in
  // steady state whenever the channel was free for it.
  for (std::size_t i = 0; i < schedule.bts.size(); ++i) {
    const BlockTransfer& bt = schedule.bts[i];
    if (!bt.fully_extended() || bt.copy.whole_array()) continue;
    bool back_edge_covers = !bt.freedom.empty() &&
                            bt.freedom.front().kind == HideRegion::Kind::BackEdgeCrossing &&
                            bt.back_edge_crossings > 0 &&
                            bt.freedom.front().cpu_cycles >= bt.bt_time;
    if (!back_edge_covers) continue;
    std::uint64_t trip = model.loops[bt.copy.level_loop].trip_count;
    const BtStats& st = sim.bts[i];
    for (std::uint64_t act = 0; act < st.acts.size(); ++act) {
      if (act % trip == 0) continue;  // warm-up fill of each context
      const ActivationStats& a = st.acts[act];
      if (!a.contended && a.wait != 0)
        complain("hidden transfer still waits: " + bt.id + "#" + std::to_string(act) + " waited " +
                 std::to_string(a.wait));
    }
  }
  return result;
}

std::string trace_to_csv(const std::vector<TraceEvent>& trace) {
  std::string out = "cycle,event,object\n";
  for (const TraceEvent& e : trace)
    out += std::to_string(e.cycle) + "," + e.event + "," + e.object + "\n";
  return out;
}

}  // namespace mhla
