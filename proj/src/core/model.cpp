#include "core/model.hpp"

#include <algorithm>
#include <set>

#include "core/errors.hpp"
#include "json.hpp"

namespace mhla {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& rule) {
  throw InputError(path + ": " + rule);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const char* key : required)
    if (!obj.contains(key)) fail(path, std::string("missing key '") + key + "'");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    for (const char* key : optional) known = known || it.key() == key;
    if (!known) fail(path, "unknown key '" + it.key() + "'");
  }
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t min_value) {
  const json& v = obj.at(key);
  std::string vpath = path + "." + key;
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(vpath, "expected a non-negative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(vpath, "must be non-negative");
  std::uint64_t r = v.get<std::uint64_t>();
  if (r < min_value) fail(vpath, "must be >= " + std::to_string(min_value));
  return r;
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string() || v.get<std::string>().empty())
    fail(path + "." + key, "expected a non-empty string");
  return v.get<std::string>();
}

Rat get_energy(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  std::string vpath = path + "." + key;
  if (!v.is_number()) fail(vpath, "expected a decimal number");
  Rat r;
  try {
    r = Rat::from_decimal_string(v.dump());
  } catch (const InputError&) {
    fail(vpath, "unsupported numeric literal");
  }
  if (r.is_negative()) fail(vpath, "must be non-negative");
  return r;
}

std::uint64_t checked_mul_u64(std::uint64_t a, std::uint64_t b, const std::string& what) {
  unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  if (r > UINT64_MAX / 4) throw InputError(what + ": value too large");
  return static_cast<std::uint64_t>(r);
}

// Recursive descent over a loop's JSON body; fills the loop/stmt arenas.
int parse_loop(const json& j, const std::string& path, AppModel& model);

void parse_body_item(const json& j, const std::string& path, AppModel& model,
                     std::vector<ItemRef>& body) {
  if (!j.is_object()) fail(path, "expected a loop or statement object");
  if (j.contains("trip_count")) {
    body.push_back({ItemRef::Kind::Loop, parse_loop(j, path, model)});
    return;
  }
  check_keys(j, path,
             {"id", "array", "reads_per_iter", "writes_per_iter", "compute_cycles_per_iter",
              "window"},
             {"read_modify_write"});
  AccessStatement s;
  s.id = get_string(j, path, "id");
  s.array = get_string(j, path, "array");
  s.reads_per_iter = get_u64(j, path, "reads_per_iter", 0);
  s.writes_per_iter = get_u64(j, path, "writes_per_iter", 0);
  s.compute_cycles_per_iter = get_u64(j, path, "compute_cycles_per_iter", 0);
  if (j.contains("read_modify_write")) {
    if (!j.at("read_modify_write").is_boolean())
      fail(path + ".read_modify_write", "expected a boolean");
    s.read_modify_write = j.at("read_modify_write").get<bool>();
  }
  const json& w = j.at("window");
  if (!w.is_array()) fail(path + ".window", "expected an array");
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::string wpath = path + ".window[" + std::to_string(i) + "]";
    check_keys(w[i], wpath, {"loop", "footprint_elems", "new_elems_per_iter"});
    WindowLevel wl;
    wl.loop = get_string(w[i], wpath, "loop");
    wl.footprint_elems = get_u64(w[i], wpath, "footprint_elems", 1);
    wl.new_elems_per_iter = get_u64(w[i], wpath, "new_elems_per_iter", 0);
    s.window.push_back(wl);
  }
  int index = static_cast<int>(model.stmts.size());
  model.stmts.push_back(std::move(s));
  body.push_back({ItemRef::Kind::Stmt, index});
}

int parse_loop(const json& j, const std::string& path, AppModel& model) {
  check_keys(j, path, {"id", "trip_count", "body"});
  LoopInfo loop;
  loop.id = get_string(j, path, "id");
  loop.trip_count = get_u64(j, path, "trip_count", 1);
  int index = static_cast<int>(model.loops.size());
  model.loops.push_back(std::move(loop));
  const json& body = j.at("body");
  if (!body.is_array()) fail(path + ".body", "expected an array");
  std::vector<ItemRef> items;
  for (std::size_t i = 0; i < body.size(); ++i)
    parse_body_item(body[i], path + ".body[" + std::to_string(i) + "]", model, items);
  model.loops[index].body = std::move(items);
  return index;
}

void derive_loop_info(AppModel& model, int loop, int parent, int depth,
                      std::uint64_t enclosing_iters) {
  LoopInfo& l = model.loops[loop];
  l.parent = parent;
  l.depth = depth;
  l.enclosing_iterations = enclosing_iters;
  std::uint64_t inner = checked_mul_u64(enclosing_iters, l.trip_count, "loop '" + l.id + "'");
  for (const ItemRef& item : l.body) {
    if (item.kind == ItemRef::Kind::Loop) {
      derive_loop_info(model, item.index, loop, depth + 1, inner);
    } else {
      AccessStatement& s = model.stmts[item.index];
      s.parent_loop = loop;
      s.total_iterations = inner;
      s.enclosing.clear();
      for (int a = loop; a != -1; a = model.loops[a].parent) s.enclosing.push_back(a);
    }
  }
}

}  // namespace

int PlatformSpec::home_layer() const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (!layers[i].on_chip && !layers[i].capacity) return static_cast<int>(i);
  throw InternalError("platform has no off-chip home layer");
}

std::vector<int> PlatformSpec::on_chip_layers() const {
  std::vector<int> r;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].on_chip) r.push_back(static_cast<int>(i));
  return r;
}

int AppModel::array_index(const std::string& name) const {
  for (std::size_t i = 0; i < arrays.size(); ++i)
    if (arrays[i].name == name) return static_cast<int>(i);
  return -1;
}

int AppModel::loop_index(const std::string& id) const {
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (loops[i].id == id) return static_cast<int>(i);
  return -1;
}

bool AppModel::loop_encloses(int ancestor, int loop) const {
  for (int l = loop; l != -1; l = loops[l].parent)
    if (l == ancestor) return true;
  return false;
}

bool AppModel::stmt_inside(int stmt, int loop) const {
  return loop_encloses(loop, stmts[stmt].parent_loop);
}

void finalize_model(AppModel& model) {
  if (model.arrays.empty()) throw InputError("no arrays declared");

  std::set<std::string> names;
  for (const ArrayDecl& a : model.arrays) {
    if (a.element_bytes < 1) throw InputError("array '" + a.name + "': element_bytes must be >= 1");
    if (a.elements < 1) throw InputError("array '" + a.name + "': elements must be >= 1");
    checked_mul_u64(a.element_bytes, a.elements, "array '" + a.name + "'");
    if (!names.insert(a.name).second) throw InputError("duplicate array name '" + a.name + "'");
  }

  // Loop and statement ids share one namespace.
  std::set<std::string> ids;
  for (const LoopInfo& l : model.loops) {
    if (l.trip_count < 1) throw InputError("loop '" + l.id + "': trip_count must be >= 1");
    if (!ids.insert(l.id).second) throw InputError("duplicate id '" + l.id + "'");
  }
  for (const AccessStatement& s : model.stmts)
    if (!ids.insert(s.id).second) throw InputError("duplicate id '" + s.id + "'");

  for (const ItemRef& item : model.root)
    if (item.kind != ItemRef::Kind::Loop)
      throw InternalError("top-level items must be loops");
  for (const ItemRef& item : model.root)
    derive_loop_info(model, item.index, -1, 0, 1);

  std::vector<bool> array_used(model.arrays.size(), false);
  for (AccessStatement& s : model.stmts) {
    s.array_index = model.array_index(s.array);
    if (s.array_index < 0)
      throw InputError("statement '" + s.id + "': unknown array '" + s.array + "'");
    array_used[s.array_index] = true;
    if (s.writes_per_iter > 0 && s.reads_per_iter > 0 && !s.read_modify_write)
      throw InputError("statement '" + s.id +
                       "': mixes reads and writes without read_modify_write flag");

    const ArrayDecl& arr = model.arrays[s.array_index];
    int prev_depth = INT32_MAX;
    std::uint64_t prev_fp = 0;
    bool have_prev = false;
    for (WindowLevel& w : s.window) {
      w.loop_index = model.loop_index(w.loop);
      if (w.loop_index < 0)
        throw InputError("statement '" + s.id + "': window names unknown loop '" + w.loop + "'");
      if (std::find(s.enclosing.begin(), s.enclosing.end(), w.loop_index) == s.enclosing.end())
        throw InputError("statement '" + s.id + "': window loop '" + w.loop +
                         "' does not enclose the statement");
      int depth = model.loops[w.loop_index].depth;
      if (depth >= prev_depth)
        throw InputError("statement '" + s.id + "': window entries must go innermost outward");
      prev_depth = depth;
      if (w.new_elems_per_iter > w.footprint_elems)
        throw InputError("statement '" + s.id + "': window new_elems " +
                         std::to_string(w.new_elems_per_iter) + " > footprint " +
                         std::to_string(w.footprint_elems));
      if (w.footprint_elems > arr.elements)
        throw InputError("statement '" + s.id + "': window footprint exceeds array '" + arr.name +
                         "'");
      if (have_prev && w.footprint_elems < prev_fp)
        throw InputError("statement '" + s.id +
                         "': window footprint must not shrink toward outer loops");
      prev_fp = w.footprint_elems;
      have_prev = true;
    }
  }
  for (std::size_t i = 0; i < model.arrays.size(); ++i)
    if (!array_used[i])
      throw InputError("array '" + model.arrays[i].name + "' has no access statements");
}

void validate_platform(const PlatformSpec& platform) {
  if (platform.layers.empty()) throw InputError("platform declares no memory layers");
  std::set<std::string> ids;
  int unbounded_off_chip = 0;
  for (const MemoryLayer& l : platform.layers) {
    if (!ids.insert(l.id).second) throw InputError("duplicate layer id '" + l.id + "'");
    if (l.on_chip && !l.capacity)
      throw InputError("layer '" + l.id + "': on-chip layers need a finite capacity");
    if (!l.on_chip && !l.capacity) ++unbounded_off_chip;
    if (l.energy_read.is_negative() || l.energy_write.is_negative())
      throw InputError("layer '" + l.id + "': negative energy");
  }
  if (unbounded_off_chip != 1)
    throw InputError("exactly one unbounded off-chip layer is required, found " +
                     std::to_string(unbounded_off_chip));
  const MemoryLayer& last = platform.layers.back();
  if (last.on_chip || last.capacity)
    throw InputError("last layer must be the unbounded off-chip home");
  if (platform.dma.bytes_per_cycle < 1) throw InputError("dma.bytes_per_cycle must be >= 1");
  if (platform.dma.channels != 1) throw InputError("dma supports exactly one channel");
}

AppModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model: invalid JSON: ") + e.what());
  }
  check_keys(j, "model", {"arrays", "loops"});
  AppModel model;
  const json& arrays = j.at("arrays");
  if (!arrays.is_array()) fail("model.arrays", "expected an array");
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    std::string path = "model.arrays[" + std::to_string(i) + "]";
    check_keys(arrays[i], path, {"name", "element_bytes", "elements"});
    ArrayDecl a;
    a.name = get_string(arrays[i], path, "name");
    a.element_bytes = get_u64(arrays[i], path, "element_bytes", 1);
    a.elements = get_u64(arrays[i], path, "elements", 1);
    model.arrays.push_back(std::move(a));
  }
  const json& loops = j.at("loops");
  if (!loops.is_array()) fail("model.loops", "expected an array");
  for (std::size_t i = 0; i < loops.size(); ++i) {
    std::string path = "model.loops[" + std::to_string(i) + "]";
    if (!loops[i].is_object() || !loops[i].contains("trip_count"))
      fail(path, "top-level items must be loops");
    model.root.push_back({ItemRef::Kind::Loop, parse_loop(loops[i], path, model)});
  }
  finalize_model(model);
  return model;
}

PlatformSpec parse_platform(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("platform: invalid JSON: ") + e.what());
  }
  check_keys(j, "platform", {"layers", "dma"});
  PlatformSpec p;
  const json& layers = j.at("layers");
  if (!layers.is_array()) fail("platform.layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::string path = "platform.layers[" + std::to_string(i) + "]";
    check_keys(layers[i], path, {"id", "on_chip", "latency", "energy_read", "energy_write"},
               {"capacity"});
    MemoryLayer l;
    l.id = get_string(layers[i], path, "id");
    if (!layers[i].at("on_chip").is_boolean()) fail(path + ".on_chip", "expected a boolean");
    l.on_chip = layers[i].at("on_chip").get<bool>();
    if (layers[i].contains("capacity")) l.capacity = get_u64(layers[i], path, "capacity", 0);
    l.latency = get_u64(layers[i], path, "latency", 0);
    l.energy_read = get_energy(layers[i], path, "energy_read");
    l.energy_write = get_energy(layers[i], path, "energy_write");
    p.layers.push_back(std::move(l));
  }
  const json& dma = j.at("dma");
  check_keys(dma, "platform.dma", {"setup_cycles", "bytes_per_cycle"});
  p.dma.setup_cycles = get_u64(dma, "platform.dma", "setup_cycles", 0);
  p.dma.bytes_per_cycle = get_u64(dma, "platform.dma", "bytes_per_cycle", 1);
  validate_platform(p);
  return p;
}

namespace {

json loop_to_json(const AppModel& model, int loop) {
  const LoopInfo& l = model.loops[loop];
  json body = json::array();
  for (const ItemRef& item : l.body) {
    if (item.kind == ItemRef::Kind::Loop) {
      body.push_back(loop_to_json(model, item.index));
    } else {
      const AccessStatement& s = model.stmts[item.index];
      json w = json::array();
      for (const WindowLevel& wl : s.window)
        w.push_back({{"loop", wl.loop},
                     {"footprint_elems", wl.footprint_elems},
                     {"new_elems_per_iter", wl.new_elems_per_iter}});
      json sj = {{"id", s.id},
                 {"array", s.array},
                 {"reads_per_iter", s.reads_per_iter},
                 {"writes_per_iter", s.writes_per_iter},
                 {"compute_cycles_per_iter", s.compute_cycles_per_iter},
                 {"window", std::move(w)}};
      if (s.read_modify_write) sj["read_modify_write"] = true;
      body.push_back(std::move(sj));
    }
  }
  return {{"id", l.id}, {"trip_count", l.trip_count}, {"body", std::move(body)}};
}

}  // namespace

std::string serialize_model(const AppModel& model) {
  json arrays = json::array();
  for (const ArrayDecl& a : model.arrays)
    arrays.push_back(
        {{"name", a.name}, {"element_bytes", a.element_bytes}, {"elements", a.elements}});
  json loops = json::array();
  for (const ItemRef& item : model.root) loops.push_back(loop_to_json(model, item.index));
  json j = {{"arrays", std::move(arrays)}, {"loops", std::move(loops)}};
  return j.dump(2) + "\n";
}

std::string serialize_platform(const PlatformSpec& platform) {
  json layers = json::array();
  for (const MemoryLayer& l : platform.layers) {
    json lj = {{"id", l.id}, {"on_chip", l.on_chip}};
    if (l.capacity) lj["capacity"] = *l.capacity;
    lj["latency"] = l.latency;
    lj["energy_read"] = json::parse(l.energy_read.to_decimal_string());
    lj["energy_write"] = json::parse(l.energy_write.to_decimal_string());
    layers.push_back(std::move(lj));
  }
  json j = {{"layers", std::move(layers)},
            {"dma",
             {{"setup_cycles", platform.dma.setup_cycles},
              {"bytes_per_cycle", platform.dma.bytes_per_cycle}}}};
  return j.dump(2) + "\n";
}

namespace {

void linearize_items(const AppModel& model, const std::vector<ItemRef>& items, Linearized& out) {
  for (const ItemRef& item : items) {
    if (item.kind == ItemRef::Kind::Loop) {
      out.loop_entry[item.index] = out.slots.size();
      out.slots.push_back({out.slots.size(), SlotKind::LoopEntry, item});
      linearize_items(model, model.loops[item.index].body, out);
      out.loop_back[item.index] = out.slots.size();
      out.slots.push_back({out.slots.size(), SlotKind::LoopBack, item});
    } else {
      out.stmt_slot[item.index] = out.slots.size();
      out.slots.push_back({out.slots.size(), SlotKind::Statement, item});
    }
  }
}

}  // namespace

Linearized linearize(const AppModel& model) {
  Linearized out;
  out.loop_entry.resize(model.loops.size(), 0);
  out.loop_back.resize(model.loops.size(), 0);
  out.stmt_slot.resize(model.stmts.size(), 0);
  linearize_items(model, model.root, out);
  return out;
}

std::string slot_label(const AppModel& model, const Slot& slot) {
  if (slot.kind == SlotKind::Statement) return model.stmts[slot.node.index].id;
  const std::string& id = model.loops[slot.node.index].id;
  return slot.kind == SlotKind::LoopEntry ? id + ".entry" : id + ".back";
}

}  // namespace mhla
