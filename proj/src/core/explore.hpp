#pragma once

#include <string>
#include <vector>

#include "core/assign.hpp"
#include "core/model.hpp"
#include "core/sim.hpp"
#include "core/timeext.hpp"

namespace mhla {

struct TradeoffPoint {
  Bytes capacity = 0;
  Cycles cycles_no_te = 0;
  Cycles cycles_te = 0;
  Rat energy_pj;
  Bytes peak_bytes = 0;
  bool pareto = false;

  Assignment assignment;
  Schedule schedule;
  SimReport sim;
};

struct ExploreOptions {
  bool te = true;
  bool oracle = false;      // exhaustive assignment instead of greedy
  bool with_trace = false;  // collect simulator event traces
};

// One point per requested capacity (ascending): assign, extend, simulate,
// verify. Any verification failure aborts the sweep.
std::vector<TradeoffPoint> sweep(const AppModel& model, const Linearized& lin,
                                 const PlatformSpec& platform, std::vector<Bytes> capacities,
                                 const ExploreOptions& options);

// Marks and returns the points not dominated in (capacity, energy, cycles_te).
// Exact duplicates keep their first occurrence.
std::vector<TradeoffPoint> pareto(std::vector<TradeoffPoint>& points);

std::string points_to_csv(const std::vector<TradeoffPoint>& points);
std::string point_detail_json(const AppModel& model, const PlatformSpec& platform,
                              const TradeoffPoint& point);
std::string point_intervals_csv(const AppModel& model, const Linearized& lin,
                                const PlatformSpec& platform, const TradeoffPoint& point);

}  // namespace mhla
