#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/rational.hpp"

namespace mhla {

using Cycles = std::uint64_t;
using Bytes = std::uint64_t;

// ---------------------------------------------------------------------------
// Platform
// ---------------------------------------------------------------------------

struct MemoryLayer {
  std::string id;
  bool on_chip = false;
  std::optional<Bytes> capacity;  // absent => unbounded (the off-chip home)
  Cycles latency = 0;             // CPU cycles per access
  Rat energy_read;                // pJ per access
  Rat energy_write;

  bool operator==(const MemoryLayer&) const = default;
};

struct DmaSpec {
  Cycles setup_cycles = 0;
  std::uint64_t bytes_per_cycle = 1;
  int channels = 1;  // fixed; a single transfer engine

  bool operator==(const DmaSpec&) const = default;
};

struct PlatformSpec {
  std::vector<MemoryLayer> layers;  // ordered closest-to-CPU first; last = off-chip home
  DmaSpec dma;

  int home_layer() const;  // index of the unbounded off-chip layer
  std::vector<int> on_chip_layers() const;

  bool operator==(const PlatformSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

struct ArrayDecl {
  std::string name;
  std::uint64_t element_bytes = 1;
  std::uint64_t elements = 1;

  Bytes total_bytes() const { return element_bytes * elements; }
  bool operator==(const ArrayDecl&) const = default;
};

struct WindowLevel {
  std::string loop;  // id of an enclosing loop
  std::uint64_t footprint_elems = 0;
  std::uint64_t new_elems_per_iter = 0;

  int loop_index = -1;  // derived

  bool operator==(const WindowLevel& o) const {
    return loop == o.loop && footprint_elems == o.footprint_elems &&
           new_elems_per_iter == o.new_elems_per_iter;
  }
};

struct ItemRef {
  enum class Kind { Loop, Stmt };
  Kind kind = Kind::Loop;
  int index = -1;

  bool operator==(const ItemRef&) const = default;
};

struct AccessStatement {
  std::string id;
  std::string array;
  std::uint64_t reads_per_iter = 0;
  std::uint64_t writes_per_iter = 0;
  Cycles compute_cycles_per_iter = 0;
  bool read_modify_write = false;
  std::vector<WindowLevel> window;  // innermost outward

  // derived
  int array_index = -1;
  int parent_loop = -1;
  std::vector<int> enclosing;  // loop indices innermost..outermost
  std::uint64_t total_iterations = 1;

  bool is_writer() const { return writes_per_iter > 0; }

  bool operator==(const AccessStatement& o) const {
    return id == o.id && array == o.array && reads_per_iter == o.reads_per_iter &&
           writes_per_iter == o.writes_per_iter &&
           compute_cycles_per_iter == o.compute_cycles_per_iter &&
           read_modify_write == o.read_modify_write && window == o.window;
  }
};

struct LoopInfo {
  std::string id;
  std::uint64_t trip_count = 1;
  std::vector<ItemRef> body;

  // derived
  int parent = -1;
  int depth = 0;
  std::uint64_t enclosing_iterations = 1;  // product of trips of strict ancestors

  bool operator==(const LoopInfo& o) const {
    return id == o.id && trip_count == o.trip_count && body == o.body;
  }
};

struct AppModel {
  std::vector<ArrayDecl> arrays;
  std::vector<LoopInfo> loops;       // arena, pre-order
  std::vector<AccessStatement> stmts;
  std::vector<ItemRef> root;         // top-level loops in source order

  int array_index(const std::string& name) const;
  int loop_index(const std::string& id) const;
  // True when `ancestor` encloses `loop` (or equals it).
  bool loop_encloses(int ancestor, int loop) const;
  // True when statement `stmt` lies inside loop `loop`'s subtree.
  bool stmt_inside(int stmt, int loop) const;

  bool operator==(const AppModel& o) const {
    return arrays == o.arrays && loops == o.loops && stmts == o.stmts && root == o.root;
  }
};

// ---------------------------------------------------------------------------
// Linearization: pre-order slot sequence used by dependency/extension analysis
// ---------------------------------------------------------------------------

enum class SlotKind { LoopEntry, Statement, LoopBack };

struct Slot {
  std::size_t index = 0;
  SlotKind kind = SlotKind::Statement;
  ItemRef node;
};

struct Linearized {
  std::vector<Slot> slots;
  std::vector<std::size_t> loop_entry;  // per loop index
  std::vector<std::size_t> loop_back;
  std::vector<std::size_t> stmt_slot;   // per statement index
};

Linearized linearize(const AppModel& model);
std::string slot_label(const AppModel& model, const Slot& slot);

// ---------------------------------------------------------------------------
// Parsing / serialization (strict UTF-8 JSON documents)
// ---------------------------------------------------------------------------

AppModel parse_model(const std::string& text);
PlatformSpec parse_platform(const std::string& text);

std::string serialize_model(const AppModel& model);
std::string serialize_platform(const PlatformSpec& platform);

// Recomputes derived fields and checks every model invariant. parse_model
// calls this; programmatically built models go through it too.
void finalize_model(AppModel& model);
void validate_platform(const PlatformSpec& platform);

}  // namespace mhla
