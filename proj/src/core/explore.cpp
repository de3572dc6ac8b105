#include "core/explore.hpp"

#include <algorithm>

#include "core/errors.hpp"
#include "json.hpp"

namespace mhla {

std::vector<TradeoffPoint> sweep(const AppModel& model, const Linearized& lin,
                                 const PlatformSpec& platform, std::vector<Bytes> capacities,
                                 const ExploreOptions& options) {
  if (capacities.empty()) throw InputError("no capacities to sweep");
  std::stable_sort(capacities.begin(), capacities.end());

  std::vector<TradeoffPoint> points;
  for (Bytes capacity : capacities) {
    TradeoffPoint p;
    p.capacity = capacity;
    p.assignment = options.oracle ? exhaustive_assign(model, lin, platform, capacity)
                                  : greedy_assign(model, lin, platform, capacity);
    CostReport base = estimate_cost(model, lin, p.assignment, platform);
    p.cycles_no_te = base.total_cycles;
    p.energy_pj = base.energy_pj;

    p.schedule = options.te ? run_te(model, lin, p.assignment, platform, capacity)
                            : zero_extension_schedule(model, lin, p.assignment, platform, capacity);
    p.sim = simulate(model, lin, p.assignment, p.schedule, platform, options.with_trace);
    p.cycles_te = p.sim.total_cycles;
    p.peak_bytes = p.schedule.peak_bytes;

    VerifyResult check =
        verify_schedule(model, lin, p.assignment, p.schedule, platform, capacity);
    if (!check.pass) {
      std::string msg = "schedule verification failed at capacity " + std::to_string(capacity);
      for (const std::string& d : check.diagnostics) msg += "; " + d;
      throw InternalError(msg);
    }
    if (p.cycles_te > p.cycles_no_te)
      throw InternalError("extension made capacity " + std::to_string(capacity) + " slower: " +
                          std::to_string(p.cycles_te) + " > " + std::to_string(p.cycles_no_te));
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

bool leq_all(const TradeoffPoint& a, const TradeoffPoint& b) {
  return a.capacity <= b.capacity && !(b.energy_pj < a.energy_pj) && a.cycles_te <= b.cycles_te;
}

bool strictly_less_somewhere(const TradeoffPoint& a, const TradeoffPoint& b) {
  return a.capacity < b.capacity || a.energy_pj < b.energy_pj || a.cycles_te < b.cycles_te;
}

}  // namespace

std::vector<TradeoffPoint> pareto(std::vector<TradeoffPoint>& points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      if (leq_all(points[j], points[i]) &&
          (strictly_less_somewhere(points[j], points[i]) || j < i))
        dominated = true;
    }
    points[i].pareto = !dominated;
  }
  std::vector<TradeoffPoint> frontier;
  for (const TradeoffPoint& p : points)
    if (p.pareto) frontier.push_back(p);
  return frontier;
}

std::string points_to_csv(const std::vector<TradeoffPoint>& points) {
  if (points.empty()) throw InputError("nothing to report");
  std::string out = "capacity,cycles_no_te,cycles_te,energy_pj,peak_bytes,pareto\n";
  for (const TradeoffPoint& p : points) {
    out += std::to_string(p.capacity) + "," + std::to_string(p.cycles_no_te) + "," +
           std::to_string(p.cycles_te) + "," + p.energy_pj.to_decimal_string() + "," +
           std::to_string(p.peak_bytes) + "," + (p.pareto ? "1" : "0") + "\n";
  }
  return out;
}

std::string point_detail_json(const AppModel& model, const PlatformSpec& platform,
                              const TradeoffPoint& point) {
  nlohmann::ordered_json j = {
      {"capacity", point.capacity},
      {"assignment",
       nlohmann::ordered_json::parse(assignment_to_json(model, platform, point.assignment))},
      {"schedule", nlohmann::ordered_json::parse(schedule_to_json(point.schedule))}};
  return j.dump(2) + "\n";
}

std::string point_intervals_csv(const AppModel& model, const Linearized& lin,
                                const PlatformSpec& platform, const TradeoffPoint& point) {
  auto intervals = lifetime_intervals(model, lin, schedule_placements(point.schedule),
                                      point.assignment.home_layer, platform);
  return intervals_to_csv(intervals);
}

}  // namespace mhla
