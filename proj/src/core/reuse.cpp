#include "core/reuse.hpp"

#include <algorithm>
#include <set>

#include "core/errors.hpp"

namespace mhla {

namespace {

// Top-level construct (root item) containing the given loop.
int top_level_ancestor(const AppModel& model, int loop) {
  int l = loop;
  while (model.loops[l].parent != -1) l = model.loops[l].parent;
  return l;
}

std::string make_candidate_id(const std::string& array, const std::string& level,
                              const std::string& stmt, std::set<std::string>& taken) {
  std::string base = array + "@" + level;
  if (taken.insert(base).second) return base;
  std::string full = base + "/" + stmt;
  if (!taken.insert(full).second) throw InternalError("candidate id collision: " + full);
  return full;
}

}  // namespace

std::vector<std::vector<CopyCandidate>> enumerate_candidates(const AppModel& model,
                                                             const Linearized& lin) {
  std::vector<std::vector<CopyCandidate>> per_array(model.arrays.size());
  std::set<std::string> taken_ids;

  for (std::size_t ai = 0; ai < model.arrays.size(); ++ai) {
    const ArrayDecl& arr = model.arrays[ai];

    // Statement-level candidates, statements in slot order.
    std::vector<int> readers;
    for (std::size_t si = 0; si < model.stmts.size(); ++si) {
      const AccessStatement& s = model.stmts[si];
      if (s.array_index == static_cast<int>(ai) && s.reads_per_iter > 0 && !s.is_writer())
        readers.push_back(static_cast<int>(si));
    }
    std::sort(readers.begin(), readers.end(),
              [&](int a, int b) { return lin.stmt_slot[a] < lin.stmt_slot[b]; });

    for (int si : readers) {
      const AccessStatement& s = model.stmts[si];
      for (const WindowLevel& w : s.window) {
        // A fill racing a writer inside the covered loop cannot be ordered.
        bool writer_inside = false;
        for (const AccessStatement& o : model.stmts)
          if (o.array_index == static_cast<int>(ai) && o.is_writer() &&
              model.stmt_inside(static_cast<int>(&o - model.stmts.data()), w.loop_index))
            writer_inside = true;
        if (writer_inside) continue;
        // Re-fetching the full array every iteration exploits no reuse; the
        // whole-array candidate covers that case with a single transfer.
        if (w.footprint_elems == arr.elements && w.new_elems_per_iter == w.footprint_elems)
          continue;

        const LoopInfo& level = model.loops[w.loop_index];
        CopyCandidate c;
        c.array_index = static_cast<int>(ai);
        c.stmt_index = si;
        c.level_loop = w.loop_index;
        c.buffer_bytes = w.footprint_elems * arr.element_bytes;
        c.steady_bytes = w.new_elems_per_iter * arr.element_bytes;
        c.first_bytes = c.buffer_bytes;
        c.activations = level.enclosing_iterations * level.trip_count;
        c.reads_absorbed = s.reads_per_iter * s.total_iterations;
        c.id = make_candidate_id(arr.name, level.id, s.id, taken_ids);
        per_array[ai].push_back(std::move(c));
      }
    }

    // Whole-array candidate: one fill, placed ahead of the first reader. Only
    // valid when every writer statically precedes that fill.
    if (!readers.empty()) {
      int first_reader = readers.front();
      int top = top_level_ancestor(model, model.stmts[first_reader].parent_loop);
      std::size_t issue = lin.loop_entry[top];
      bool writer_conflicts = false;
      std::uint64_t reads = 0;
      for (const AccessStatement& s : model.stmts) {
        if (s.array_index != static_cast<int>(ai)) continue;
        if (s.is_writer() && lin.stmt_slot[&s - model.stmts.data()] >= issue)
          writer_conflicts = true;
        if (!s.is_writer() && s.reads_per_iter > 0) reads += s.reads_per_iter * s.total_iterations;
      }
      if (!writer_conflicts) {
        CopyCandidate c;
        c.array_index = static_cast<int>(ai);
        c.stmt_index = -1;
        c.level_loop = -1;
        c.buffer_bytes = arr.total_bytes();
        c.steady_bytes = c.buffer_bytes;
        c.first_bytes = c.buffer_bytes;
        c.activations = 1;
        c.reads_absorbed = reads;
        c.id = make_candidate_id(arr.name, "top", "", taken_ids);
        per_array[ai].push_back(std::move(c));
      }
    }

    std::sort(per_array[ai].begin(), per_array[ai].end(),
              [](const CopyCandidate& a, const CopyCandidate& b) {
                if (a.buffer_bytes != b.buffer_bytes) return a.buffer_bytes < b.buffer_bytes;
                return a.id < b.id;
              });
  }
  return per_array;
}

std::size_t nominal_issue_slot(const AppModel& model, const Linearized& lin,
                               const CopyCandidate& cand) {
  if (!cand.whole_array()) return lin.loop_entry[cand.level_loop];
  // Whole-array: just before the top-level construct holding the first reader.
  std::size_t best = lin.slots.size();
  for (std::size_t si = 0; si < model.stmts.size(); ++si) {
    const AccessStatement& s = model.stmts[si];
    if (s.array_index == cand.array_index && s.reads_per_iter > 0 && !s.is_writer())
      best = std::min(best, lin.stmt_slot[si]);
  }
  if (best == lin.slots.size()) throw InternalError("candidate without readers: " + cand.id);
  int stmt = lin.slots[best].node.index;
  int top = top_level_ancestor(model, model.stmts[stmt].parent_loop);
  return lin.loop_entry[top];
}

std::size_t candidate_end_slot(const AppModel& model, const Linearized& lin,
                               const CopyCandidate& cand) {
  if (!cand.whole_array()) return lin.loop_back[cand.level_loop];
  std::size_t last = 0;
  for (std::size_t si = 0; si < model.stmts.size(); ++si) {
    const AccessStatement& s = model.stmts[si];
    if (s.array_index == cand.array_index && s.reads_per_iter > 0 && !s.is_writer()) {
      int top = top_level_ancestor(model, s.parent_loop);
      last = std::max(last, lin.loop_back[top]);
    }
  }
  return last;
}

std::vector<LiveInterval> lifetime_intervals(const AppModel& model, const Linearized& lin,
                                             const std::vector<PlacedCopy>& copies,
                                             const std::vector<int>& home_layer,
                                             const PlatformSpec& platform) {
  std::vector<LiveInterval> out;

  for (std::size_t ai = 0; ai < model.arrays.size(); ++ai) {
    if (ai >= home_layer.size()) break;
    if (!platform.layers[home_layer[ai]].on_chip) continue;
    // First-writer slot to last-reader slot; unwritten arrays live from start.
    std::size_t start = lin.slots.size();
    std::size_t end = 0;
    bool any = false;
    for (std::size_t si = 0; si < model.stmts.size(); ++si) {
      const AccessStatement& s = model.stmts[si];
      if (s.array_index != static_cast<int>(ai)) continue;
      any = true;
      if (s.is_writer()) start = std::min(start, lin.stmt_slot[si]);
      if (s.reads_per_iter > 0) end = std::max(end, lin.stmt_slot[si]);
    }
    if (!any) continue;
    if (start == lin.slots.size()) start = 0;
    if (end < start) end = start;
    out.push_back({model.arrays[ai].name, start, end, model.arrays[ai].total_bytes(), 1});
  }

  for (const PlacedCopy& pc : copies) {
    if (!platform.layers[pc.layer].on_chip) continue;
    LiveInterval iv;
    iv.object = pc.cand.id;
    iv.start_slot = pc.issue_slot;
    iv.end_slot = candidate_end_slot(model, lin, pc.cand);
    iv.bytes = pc.cand.buffer_bytes;
    iv.concurrent_buffers = 1 + pc.back_edge_crossings;
    out.push_back(std::move(iv));
  }

  std::sort(out.begin(), out.end(), [](const LiveInterval& a, const LiveInterval& b) {
    return a.object < b.object;
  });
  return out;
}

Bytes peak_footprint(const std::vector<LiveInterval>& intervals) {
  if (intervals.empty()) return 0;
  std::size_t max_slot = 0;
  for (const LiveInterval& iv : intervals) max_slot = std::max(max_slot, iv.end_slot);
  // Difference array over slot indices, then a max prefix scan.
  std::vector<Bytes> delta(max_slot + 2, 0);
  for (const LiveInterval& iv : intervals) {
    if (iv.start_slot > iv.end_slot) throw InternalError("interval with start > end");
    Bytes b = iv.bytes * iv.concurrent_buffers;
    delta[iv.start_slot] += b;
    delta[iv.end_slot + 1] -= b;
  }
  Bytes cur = 0, peak = 0;
  for (std::size_t s = 0; s <= max_slot; ++s) {
    cur += delta[s];
    peak = std::max(peak, cur);
  }
  return peak;
}

std::string intervals_to_csv(const std::vector<LiveInterval>& intervals) {
  std::string out = "object,start_slot,end_slot,bytes,concurrent\n";
  for (const LiveInterval& iv : intervals) {
    out += iv.object + "," + std::to_string(iv.start_slot) + "," + std::to_string(iv.end_slot) +
           "," + std::to_string(iv.bytes) + "," + std::to_string(iv.concurrent_buffers) + "\n";
  }
  return out;
}

}  // namespace mhla
