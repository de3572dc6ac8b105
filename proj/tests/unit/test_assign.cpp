#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "core/assign.hpp"
#include "core/errors.hpp"
#include "core/model.hpp"
#include "support/gen.hpp"

using namespace mhla;
using mhla::testgen::bench_path;
using mhla::testgen::read_file;

namespace {

AppModel desk1() { return parse_model(read_file(bench_path("desk1.model.json"))); }
PlatformSpec p1() { return parse_platform(read_file(bench_path("desk1.platform.json"))); }

Assignment with_copy(const AppModel& m, const Linearized& lin, const PlatformSpec& p,
                     Bytes capacity, const std::string& cand_id) {
  Assignment asg = baseline_assignment(m, p, capacity);
  for (const auto& per_array : enumerate_candidates(m, lin))
    for (const CopyCandidate& c : per_array)
      if (c.id == cand_id) asg.selected.push_back({c, 0});
  REQUIRE(asg.selected.size() == 1);
  return asg;
}

}  // namespace

TEST_CASE("desk1 baseline cost: everything off-chip") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  CostReport r = estimate_cost(m, lin, baseline_assignment(m, p, 0), p);
  CHECK(r.cpu_cycles == 60416);  // 1024*(1+10) + 4096*(2+10)
  CHECK(r.wait_cycles == 0);
  CHECK(r.total_cycles == 60416);
  CHECK(r.energy_pj == Rat(51200));  // 5120 accesses at 10 pJ
  CHECK(r.peak_onchip_bytes == 0);
}

TEST_CASE("desk1 cost with the windowed copy on L1") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  Assignment asg = with_copy(m, lin, p, 64, "A@I");
  CostReport r = estimate_cost(m, lin, asg, p);
  CHECK(r.cpu_cycles == 23552);  // 11264 + 4096*(2+1)
  CHECK(r.wait_cycles == 1664);  // 64 transfers of 26 cycles
  CHECK(r.total_cycles == 25216);
  CHECK(r.energy_pj == Rat(25600));  // 10240 + 1024*(10+1) + 4096*1
  CHECK(r.peak_onchip_bytes == 64);
  CHECK(serving_layer(m, asg, p, 1) == 0);
  CHECK(serving_layer(m, asg, p, 0) == 1);  // writes stay at the home layer
  CHECK(loop_body_busy(m, asg, p, m.loop_index("I")) == 192);
}

TEST_CASE("an empty program costs nothing") {
  AppModel m;  // no arrays, no loops
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  CostReport r = estimate_cost(m, lin, baseline_assignment(m, p, 0), p);
  CHECK(r.cpu_cycles == 0);
  CHECK(r.wait_cycles == 0);
  CHECK(r.total_cycles == 0);
  CHECK(r.energy_pj == Rat(0));
  CHECK(r.peak_onchip_bytes == 0);
}

TEST_CASE("estimate rejects an over-capacity assignment") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  Assignment asg = with_copy(m, lin, p, 16, "A@I");  // 64 B buffer vs 16 B budget
  CHECK_THROWS_AS(estimate_cost(m, lin, asg, p), InternalError);
}

TEST_CASE("greedy assignment on desk1") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);

  SUBCASE("capacity 64 takes the windowed copy") {
    Assignment asg = greedy_assign(m, lin, p, 64);
    REQUIRE(asg.selected.size() == 1);
    CHECK(asg.selected[0].cand.id == "A@I");
    CHECK(asg.selected[0].layer == 0);
    CHECK(estimate_cost(m, lin, asg, p).energy_pj == Rat(25600));
  }
  SUBCASE("capacity 0 stays at the baseline") {
    Assignment asg = greedy_assign(m, lin, p, 0);
    CHECK(asg.selected.empty());
    CHECK(estimate_cost(m, lin, asg, p).energy_pj == Rat(51200));
  }
  SUBCASE("capacity 4096: equal energy, the smaller buffer wins on gain per byte") {
    Assignment asg = greedy_assign(m, lin, p, 4096);
    REQUIRE(asg.selected.size() == 1);
    CHECK(asg.selected[0].cand.id == "A@I");
  }
}

TEST_CASE("exhaustive assignment on desk1") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);

  Assignment at64 = exhaustive_assign(m, lin, p, 64);
  REQUIRE(at64.selected.size() == 1);
  CHECK(at64.selected[0].cand.id == "A@I");
  CHECK(estimate_cost(m, lin, at64, p).energy_pj == Rat(25600));

  Assignment at0 = exhaustive_assign(m, lin, p, 0);
  CHECK(at0.selected.empty());
}

TEST_CASE("disjoint lifetimes share one budget") {
  // Two arrays consumed in back-to-back loops; both 64 B copies fit in 64 B.
  std::string text = R"({
    "arrays":[{"name":"X","element_bytes":4,"elements":16},
              {"name":"Y","element_bytes":4,"elements":16}],
    "loops":[
      {"id":"L1","trip_count":16,"body":[
        {"id":"rx","array":"X","reads_per_iter":4,"writes_per_iter":0,
         "compute_cycles_per_iter":1,
         "window":[{"loop":"L1","footprint_elems":16,"new_elems_per_iter":1}]}]},
      {"id":"L2","trip_count":16,"body":[
        {"id":"ry","array":"Y","reads_per_iter":4,"writes_per_iter":0,
         "compute_cycles_per_iter":1,
         "window":[{"loop":"L2","footprint_elems":16,"new_elems_per_iter":1}]}]}]})";
  AppModel m = parse_model(text);
  PlatformSpec p = p1();
  Linearized lin = linearize(m);

  Assignment ex = exhaustive_assign(m, lin, p, 64);
  REQUIRE(ex.selected.size() == 2);
  CHECK(estimate_cost(m, lin, ex, p).peak_onchip_bytes == 64);

  Assignment gr = greedy_assign(m, lin, p, 64);
  CHECK(gr.selected.size() == 2);
}

TEST_CASE("greedy upgrades a selection when a larger candidate strictly wins") {
  AppModel m = parse_model(read_file(bench_path("desk2.model.json")));
  PlatformSpec p = parse_platform(read_file(bench_path("desk2.platform.json")));
  Linearized lin = linearize(m);

  Assignment small = greedy_assign(m, lin, p, 16);
  REQUIRE(small.selected.size() == 1);
  CHECK(small.selected[0].cand.id == "B@N");

  Assignment larger = greedy_assign(m, lin, p, 144);
  REQUIRE(larger.selected.size() == 1);
  CHECK(larger.selected[0].cand.id == "B@M");  // replaced, not stacked

  Assignment top = greedy_assign(m, lin, p, 8192);
  REQUIRE(top.selected.size() == 2);
  CHECK(top.selected[0].cand.id == "B@top");
  CHECK(top.selected[1].cand.id == "C@top");
}

TEST_CASE("multi-layer platforms place copies on the cheapest layer") {
  std::string platform_text = R"({
    "layers":[
      {"id":"L1","on_chip":true,"capacity":4096,"latency":1,"energy_read":1,"energy_write":1},
      {"id":"L2","on_chip":true,"capacity":8192,"latency":3,"energy_read":3,"energy_write":3},
      {"id":"EXT","on_chip":false,"latency":10,"energy_read":10,"energy_write":10}],
    "dma":{"setup_cycles":10,"bytes_per_cycle":4}})";
  AppModel m = desk1();
  PlatformSpec p = parse_platform(platform_text);
  Linearized lin = linearize(m);
  Assignment asg = greedy_assign(m, lin, p, 64);
  REQUIRE(asg.selected.size() == 1);
  CHECK(p.layers[asg.selected[0].layer].id == "L1");
}

TEST_CASE("exhaustive guard rejects huge search spaces") {
  std::mt19937_64 rng(99);
  // Inflate candidate counts by cloning many arrays with deep windows.
  std::string text = R"({"arrays":[)";
  for (int a = 0; a < 12; ++a) {
    if (a) text += ",";
    text += R"({"name":"A)" + std::to_string(a) + R"(","element_bytes":4,"elements":64})";
  }
  text += R"(],"loops":[{"id":"o","trip_count":4,"body":[{"id":"i","trip_count":4,"body":[
    {"id":"m","trip_count":4,"body":[)";
  for (int a = 0; a < 12; ++a) {
    if (a) text += ",";
    text += R"({"id":"s)" + std::to_string(a) + R"(","array":"A)" + std::to_string(a) +
            R"(","reads_per_iter":4,"writes_per_iter":0,"compute_cycles_per_iter":1,
               "window":[{"loop":"m","footprint_elems":4,"new_elems_per_iter":2},
                         {"loop":"i","footprint_elems":16,"new_elems_per_iter":8},
                         {"loop":"o","footprint_elems":64,"new_elems_per_iter":32}]})";
  }
  text += "]}]}]}]}";
  AppModel m = parse_model(text);
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  CHECK_THROWS_AS(exhaustive_assign(m, lin, p, 1024), InputError);
  (void)rng;
}

TEST_CASE("the oracle beats greedy on a budget trap") {
  // Picking the best gain-per-byte copy (A, 60 B) blocks the pair (B + C,
  // 100 B) that saves more energy overall. The exhaustive oracle finds it.
  std::string text = R"({
    "arrays":[{"name":"A","element_bytes":4,"elements":15},
              {"name":"B","element_bytes":2,"elements":25},
              {"name":"C","element_bytes":2,"elements":25}],
    "loops":[{"id":"L","trip_count":64,"body":[
      {"id":"ra","array":"A","reads_per_iter":15,"writes_per_iter":0,
       "compute_cycles_per_iter":1,
       "window":[{"loop":"L","footprint_elems":15,"new_elems_per_iter":1}]},
      {"id":"rb","array":"B","reads_per_iter":8,"writes_per_iter":0,
       "compute_cycles_per_iter":1,
       "window":[{"loop":"L","footprint_elems":25,"new_elems_per_iter":1}]},
      {"id":"rc","array":"C","reads_per_iter":8,"writes_per_iter":0,
       "compute_cycles_per_iter":1,
       "window":[{"loop":"L","footprint_elems":25,"new_elems_per_iter":1}]}]}]})";
  AppModel m = parse_model(text);
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  Assignment gr = greedy_assign(m, lin, p, 100);
  Assignment ex = exhaustive_assign(m, lin, p, 100);
  Rat ge = assignment_energy(m, gr, p);
  Rat xe = assignment_energy(m, ex, p);
  CHECK(ge == Rat(11365));
  CHECK(xe == Rat(11174));
  CHECK(xe < ge);
  REQUIRE(ex.selected.size() == 2);
  CHECK(ex.selected[0].cand.id == "B@top");
  CHECK(ex.selected[1].cand.id == "C@top");
}

TEST_CASE("oracle dominance and feasibility on random instances") {
  std::mt19937_64 rng(31);
  int instances = 0;
  while (instances < 60) {
    auto inst = mhla::testgen::random_instance(rng);
    Linearized lin = linearize(inst.model);
    for (Bytes capacity : {Bytes{0}, Bytes{64}, Bytes{512}, Bytes{1} << 20}) {
      Assignment gr = greedy_assign(inst.model, lin, inst.platform, capacity);
      auto copies = placed_copies(inst.model, lin, gr);
      CHECK(footprint_ok(inst.model, lin, inst.platform, copies, gr.home_layer, capacity));
      CostReport gc = estimate_cost(inst.model, lin, gr, inst.platform);

      Assignment ex;
      try {
        ex = exhaustive_assign(inst.model, lin, inst.platform, capacity);
      } catch (const InputError&) {
        continue;  // search space over the guard
      }
      CostReport xc = estimate_cost(inst.model, lin, ex, inst.platform);
      CHECK(xc.energy_pj <= gc.energy_pj);
      if (capacity == 0) {
        CHECK(gr.selected.empty());
        CHECK(ex.selected.empty());
      }
    }
    ++instances;
  }
}

TEST_CASE("assignment JSON dump is stable") {
  AppModel m = desk1();
  PlatformSpec p = p1();
  Linearized lin = linearize(m);
  Assignment asg = greedy_assign(m, lin, p, 64);
  std::string a = assignment_to_json(m, p, asg);
  std::string b = assignment_to_json(m, p, asg);
  CHECK(a == b);
  CHECK(a.find("\"A@I\"") != std::string::npos);
  CHECK(a.find("\"capacity\": 64") != std::string::npos);
}
