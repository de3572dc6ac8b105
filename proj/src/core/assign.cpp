#include "core/assign.hpp"

#include <algorithm>
#include <functional>

#include "core/errors.hpp"
#include "core/timeext.hpp"
#include "json.hpp"

namespace mhla {

const SelectedCopy* Assignment::selection_for_array(int array_index) const {
  for (const SelectedCopy& sc : selected)
    if (sc.cand.array_index == array_index) return &sc;
  return nullptr;
}

Assignment baseline_assignment(const AppModel& model, const PlatformSpec& platform,
                               Bytes capacity) {
  Assignment asg;
  asg.home_layer.assign(model.arrays.size(), platform.home_layer());
  asg.capacity = capacity;
  return asg;
}

int serving_layer(const AppModel& model, const Assignment& asg, const PlatformSpec& platform,
                  int stmt) {
  const AccessStatement& s = model.stmts[stmt];
  const SelectedCopy* sc = asg.selection_for_array(s.array_index);
  if (sc && s.reads_per_iter > 0 && !s.is_writer()) {
    if (sc->cand.whole_array() || sc->cand.stmt_index == stmt) return sc->layer;
  }
  (void)platform;
  return asg.home_layer[s.array_index];
}

Cycles stmt_busy_cycles(const AppModel& model, const Assignment& asg,
                        const PlatformSpec& platform, int stmt) {
  const AccessStatement& s = model.stmts[stmt];
  Cycles reads = s.reads_per_iter * platform.layers[serving_layer(model, asg, platform, stmt)].latency;
  Cycles writes = s.writes_per_iter * platform.layers[asg.home_layer[s.array_index]].latency;
  return s.compute_cycles_per_iter + reads + writes;
}

Cycles loop_body_busy(const AppModel& model, const Assignment& asg, const PlatformSpec& platform,
                      int loop) {
  Cycles total = 0;
  for (const ItemRef& item : model.loops[loop].body) {
    if (item.kind == ItemRef::Kind::Stmt)
      total += stmt_busy_cycles(model, asg, platform, item.index);
    else
      total += model.loops[item.index].trip_count *
               loop_body_busy(model, asg, platform, item.index);
  }
  return total;
}

std::vector<Cycles> slot_busy_cycles(const AppModel& model, const Linearized& lin,
                                     const Assignment& asg, const PlatformSpec& platform) {
  std::vector<Cycles> busy(lin.slots.size(), 0);
  for (std::size_t si = 0; si < model.stmts.size(); ++si)
    busy[lin.stmt_slot[si]] = stmt_busy_cycles(model, asg, platform, static_cast<int>(si));
  return busy;
}

std::vector<PlacedCopy> placed_copies(const AppModel& model, const Linearized& lin,
                                      const Assignment& asg) {
  std::vector<PlacedCopy> out;
  for (const SelectedCopy& sc : asg.selected)
    out.push_back({sc.cand, sc.layer, nominal_issue_slot(model, lin, sc.cand), 0});
  return out;
}

bool footprint_ok(const AppModel& model, const Linearized& lin, const PlatformSpec& platform,
                  const std::vector<PlacedCopy>& copies, const std::vector<int>& home_layer,
                  Bytes capacity) {
  auto all = lifetime_intervals(model, lin, copies, home_layer, platform);
  if (peak_footprint(all) > capacity) return false;
  for (int li : platform.on_chip_layers()) {
    std::vector<PlacedCopy> in_layer;
    for (const PlacedCopy& pc : copies)
      if (pc.layer == li) in_layer.push_back(pc);
    std::vector<int> homes_in_layer(home_layer.size(), platform.home_layer());
    for (std::size_t ai = 0; ai < home_layer.size(); ++ai)
      if (home_layer[ai] == li) homes_in_layer[ai] = li;
    auto layer_ivals = lifetime_intervals(model, lin, in_layer, homes_in_layer, platform);
    if (peak_footprint(layer_ivals) > *platform.layers[li].capacity) return false;
  }
  return true;
}

Rat assignment_energy(const AppModel& model, const Assignment& asg,
                      const PlatformSpec& platform) {
  Rat total;
  for (std::size_t si = 0; si < model.stmts.size(); ++si) {
    const AccessStatement& s = model.stmts[si];
    const MemoryLayer& serve = platform.layers[serving_layer(model, asg, platform, si)];
    const MemoryLayer& home = platform.layers[asg.home_layer[s.array_index]];
    total += serve.energy_read * Rat::from_u64(s.reads_per_iter * s.total_iterations);
    total += home.energy_write * Rat::from_u64(s.writes_per_iter * s.total_iterations);
  }
  for (const SelectedCopy& sc : asg.selected) {
    if (sc.layer == asg.home_layer[sc.cand.array_index]) continue;  // not a DMA copy
    const ArrayDecl& arr = model.arrays[sc.cand.array_index];
    std::uint64_t elems = sc.cand.bytes_moved() / arr.element_bytes;
    const MemoryLayer& src = platform.layers[asg.home_layer[sc.cand.array_index]];
    const MemoryLayer& dst = platform.layers[sc.layer];
    total += (src.energy_read + dst.energy_write) * Rat::from_u64(elems);
  }
  return total;
}

CostReport estimate_cost(const AppModel& model, const Linearized& lin, const Assignment& asg,
                         const PlatformSpec& platform) {
  CostReport r;
  for (std::size_t si = 0; si < model.stmts.size(); ++si)
    r.cpu_cycles += model.stmts[si].total_iterations *
                    stmt_busy_cycles(model, asg, platform, static_cast<int>(si));
  for (const SelectedCopy& sc : asg.selected) {
    if (sc.layer == asg.home_layer[sc.cand.array_index]) continue;
    Cycles first = compute_bt_time(sc.cand.first_bytes, platform.dma);
    Cycles steady = compute_bt_time(sc.cand.steady_bytes, platform.dma);
    r.wait_cycles += first + (sc.cand.activations - 1) * steady;
  }
  r.total_cycles = r.cpu_cycles + r.wait_cycles;
  r.energy_pj = assignment_energy(model, asg, platform);
  r.peak_onchip_bytes = peak_footprint(
      lifetime_intervals(model, lin, placed_copies(model, lin, asg), asg.home_layer, platform));
  if (r.peak_onchip_bytes > asg.capacity)
    throw InternalError("assignment exceeds capacity: " + std::to_string(r.peak_onchip_bytes) +
                        " > " + std::to_string(asg.capacity));
  return r;
}

namespace {

void insert_selection(Assignment& asg, const SelectedCopy& sc) {
  std::erase_if(asg.selected, [&](const SelectedCopy& cur) {
    return cur.cand.array_index == sc.cand.array_index;
  });
  asg.selected.push_back(sc);
  std::sort(asg.selected.begin(), asg.selected.end(),
            [](const SelectedCopy& a, const SelectedCopy& b) { return a.cand.id < b.cand.id; });
}

struct MoveEval {
  SelectedCopy sc;
  Rat gain;          // energy saved, > 0
  Bytes peak_after = 0;
  bool paid = false; // peak grew
  Bytes peak_delta = 0;
};

// Best-gain-per-byte move ordering; footprint-free moves come first.
bool move_better(const MoveEval& a, const MoveEval& b) {
  if (a.paid != b.paid) return !a.paid;
  if (a.paid) {
    // a.gain / a.delta vs b.gain / b.delta by cross multiplication
    Rat lhs = a.gain * Rat::from_u64(b.peak_delta);
    Rat rhs = b.gain * Rat::from_u64(a.peak_delta);
    if (lhs != rhs) return lhs > rhs;
  }
  if (a.sc.cand.id != b.sc.cand.id) return a.sc.cand.id < b.sc.cand.id;
  return a.sc.layer < b.sc.layer;
}

}  // namespace

Assignment greedy_assign(const AppModel& model, const Linearized& lin,
                         const PlatformSpec& platform, Bytes capacity) {
  Assignment asg = baseline_assignment(model, platform, capacity);
  auto candidates = enumerate_candidates(model, lin);
  std::vector<int> on_chip = platform.on_chip_layers();
  if (on_chip.empty()) return asg;

  Rat cur_energy = assignment_energy(model, asg, platform);
  Bytes cur_peak = 0;

  for (;;) {
    bool have_best = false;
    MoveEval best;
    for (std::size_t ai = 0; ai < candidates.size(); ++ai) {
      const SelectedCopy* current = asg.selection_for_array(static_cast<int>(ai));
      for (const CopyCandidate& cand : candidates[ai]) {
        // Only upgrades to strictly larger buffers may replace a selection.
        if (current && cand.buffer_bytes <= current->cand.buffer_bytes) continue;
        for (int layer : on_chip) {
          Assignment tentative = asg;
          insert_selection(tentative, {cand, layer});
          auto copies = placed_copies(model, lin, tentative);
          if (!footprint_ok(model, lin, platform, copies, tentative.home_layer, capacity))
            continue;
          Rat energy = assignment_energy(model, tentative, platform);
          if (!(energy < cur_energy)) continue;
          MoveEval ev;
          ev.sc = {cand, layer};
          ev.gain = cur_energy - energy;
          ev.peak_after = peak_footprint(
              lifetime_intervals(model, lin, copies, tentative.home_layer, platform));
          ev.paid = ev.peak_after > cur_peak;
          ev.peak_delta = ev.paid ? ev.peak_after - cur_peak : 0;
          if (!have_best || move_better(ev, best)) {
            best = ev;
            have_best = true;
          }
        }
      }
    }
    if (!have_best) break;
    insert_selection(asg, best.sc);
    cur_energy = cur_energy - best.gain;
    cur_peak = best.peak_after;
  }
  return asg;
}

Assignment exhaustive_assign(const AppModel& model, const Linearized& lin,
                             const PlatformSpec& platform, Bytes capacity) {
  auto candidates = enumerate_candidates(model, lin);
  std::vector<int> on_chip = platform.on_chip_layers();

  unsigned __int128 combos = 1;
  for (const auto& list : candidates) {
    combos *= 1 + static_cast<unsigned __int128>(list.size()) * on_chip.size();
    if (combos > 1000000)
      throw InputError("exhaustive search space exceeds 10^6 selections; use the greedy assigner");
  }

  Assignment best = baseline_assignment(model, platform, capacity);
  CostReport best_cost = estimate_cost(model, lin, best, platform);
  std::vector<std::string> best_ids;

  Assignment trial = baseline_assignment(model, platform, capacity);
  std::vector<std::string> trial_ids;

  auto consider = [&]() {
    auto copies = placed_copies(model, lin, trial);
    if (!footprint_ok(model, lin, platform, copies, trial.home_layer, capacity)) return;
    CostReport cost = estimate_cost(model, lin, trial, platform);
    bool better = false;
    if (cost.energy_pj != best_cost.energy_pj) {
      better = cost.energy_pj < best_cost.energy_pj;
    } else if (cost.total_cycles != best_cost.total_cycles) {
      better = cost.total_cycles < best_cost.total_cycles;
    } else {
      better = trial_ids < best_ids;
    }
    if (better) {
      best = trial;
      best_cost = cost;
      best_ids = trial_ids;
    }
  };

  std::function<void(std::size_t)> recurse = [&](std::size_t ai) {
    if (ai == candidates.size()) {
      consider();
      return;
    }
    recurse(ai + 1);  // no copy for this array
    for (const CopyCandidate& cand : candidates[ai]) {
      for (int layer : on_chip) {
        trial.selected.push_back({cand, layer});
        trial_ids.push_back(cand.id);
        std::sort(trial_ids.begin(), trial_ids.end());
        recurse(ai + 1);
        trial_ids.erase(std::find(trial_ids.begin(), trial_ids.end(), cand.id));
        trial.selected.pop_back();
      }
    }
  };
  recurse(0);

  std::sort(best.selected.begin(), best.selected.end(),
            [](const SelectedCopy& a, const SelectedCopy& b) { return a.cand.id < b.cand.id; });
  return best;
}

std::string assignment_to_json(const AppModel& model, const PlatformSpec& platform,
                               const Assignment& asg) {
  nlohmann::ordered_json home = nlohmann::ordered_json::object();
  for (std::size_t ai = 0; ai < model.arrays.size(); ++ai)
    home[model.arrays[ai].name] = platform.layers[asg.home_layer[ai]].id;
  nlohmann::ordered_json selected = nlohmann::ordered_json::array();
  for (const SelectedCopy& sc : asg.selected) {
    selected.push_back({{"id", sc.cand.id},
                        {"array", model.arrays[sc.cand.array_index].name},
                        {"level", sc.cand.whole_array() ? std::string("top")
                                                        : model.loops[sc.cand.level_loop].id},
                        {"layer", platform.layers[sc.layer].id},
                        {"buffer_bytes", sc.cand.buffer_bytes},
                        {"steady_bytes", sc.cand.steady_bytes},
                        {"first_bytes", sc.cand.first_bytes},
                        {"activations", sc.cand.activations}});
  }
  nlohmann::ordered_json j = {
      {"home", std::move(home)}, {"selected", std::move(selected)}, {"capacity", asg.capacity}};
  return j.dump(2) + "\n";
}

}  // namespace mhla
