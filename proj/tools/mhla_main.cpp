#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mhla/mhla.h"

namespace {

int input_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return out.good();
}

bool parse_capacities(const std::string& text, std::vector<std::uint64_t>& out) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) return false;
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) return false;
      out.push_back(v);
    } catch (...) {
      return false;
    }
  }
  return !out.empty();
}

struct ResultGuard {
  mhla_result* r = nullptr;
  ~ResultGuard() { mhla_result_free(r); }
};
struct ModelGuard {
  mhla_model* m = nullptr;
  ~ModelGuard() { mhla_model_free(m); }
};
struct PlatformGuard {
  mhla_platform* p = nullptr;
  ~PlatformGuard() { mhla_platform_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mhla: memory layer assignment and DMA prefetch trade-off exploration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mhla_version());

  CLI::App* explore = app.add_subcommand("explore", "sweep on-chip capacities");
  std::string model_path, platform_path, capacities_text, te = "on";
  std::string out_path, schedule_dir, trace_dir, intervals_dir;
  bool oracle = false;
  explore->add_option("--model", model_path, "application model (JSON)")->required();
  explore->add_option("--platform", platform_path, "platform description (JSON)")->required();
  explore->add_option("--capacities", capacities_text, "comma-separated byte budgets")->required();
  explore->add_option("--te", te, "time extension step: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  explore->add_option("--out", out_path, "trade-off CSV (stdout when omitted)");
  explore->add_option("--schedule-dump", schedule_dir, "directory for per-capacity schedules");
  explore->add_option("--trace", trace_dir, "directory for simulator event traces");
  explore->add_option("--intervals", intervals_dir, "directory for live-interval dumps");
  explore->add_flag("--oracle", oracle, "exhaustive assignment (small instances)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string model_text, platform_text;
  if (!read_file(model_path, model_text)) return input_error("cannot read " + model_path);
  if (!read_file(platform_path, platform_text))
    return input_error("cannot read " + platform_path);
  std::vector<std::uint64_t> capacities;
  if (!parse_capacities(capacities_text, capacities))
    return input_error("bad --capacities list '" + capacities_text + "'");

  ModelGuard model;
  if (mhla_model_parse(model_text.c_str(), &model.m) != MHLA_OK)
    return input_error(mhla_last_error());
  PlatformGuard platform;
  if (mhla_platform_parse(platform_text.c_str(), &platform.p) != MHLA_OK)
    return input_error(mhla_last_error());

  mhla_explore_options options{};
  options.te = te == "on" ? 1 : 0;
  options.oracle = oracle ? 1 : 0;
  options.with_trace = trace_dir.empty() ? 0 : 1;

  ResultGuard result;
  mhla_status rc = mhla_explore_run(model.m, platform.p, capacities.data(), capacities.size(),
                                    &options, &result.r);
  if (rc != MHLA_OK) {
    std::cerr << "error: " << mhla_last_error() << "\n";
    return rc == MHLA_ERR_INPUT ? 1 : 2;
  }

  const char* csv = mhla_result_csv(result.r);
  if (out_path.empty()) {
    std::cout << csv;
  } else if (!write_file(out_path, csv)) {
    return input_error("cannot write " + out_path);
  }

  auto dump_per_point = [&](const std::string& dir, const char* stem,
                            const char* (*get)(const mhla_result*, size_t),
                            const char* ext) -> int {
    if (dir.empty()) return 0;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    for (size_t i = 0; i < mhla_result_point_count(result.r); ++i) {
      mhla_point point{};
      mhla_result_point(result.r, i, &point);
      const char* text = get(result.r, i);
      if (!text) continue;
      std::filesystem::path file =
          std::filesystem::path(dir) /
          (std::string(stem) + "_" + std::to_string(point.capacity) + ext);
      if (!write_file(file, text)) return input_error("cannot write " + file.string());
    }
    return 0;
  };

  if (int rcd = dump_per_point(schedule_dir, "schedule", mhla_result_schedule_json, ".json"))
    return rcd;
  if (int rcd = dump_per_point(trace_dir, "trace", mhla_result_trace_csv, ".csv")) return rcd;
  if (int rcd = dump_per_point(intervals_dir, "intervals", mhla_result_intervals_csv, ".csv"))
    return rcd;
  return 0;
}
