#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "noc3d/config.hpp"
#include "noc3d/core.hpp"
#include "noc3d/layout.hpp"
#include "noc3d/power.hpp"
#include "noc3d/reliability.hpp"
#include "noc3d/svg.hpp"
#include "noc3d/thermal.hpp"
#include "noc3d/traffic.hpp"

namespace noc3d {

inline constexpr const char* kVersion = "0.1.0";

struct BenchmarkReport {
  std::string name;
  std::filesystem::path dir;
  TrafficSummary traffic;
  PowerMap power;
  std::vector<RegionTemp> region_temps;
  ReliabilityMap reliability;
};

struct ReportBundle {
  std::filesystem::path out_dir;
  std::vector<BenchmarkReport> benchmarks;
  std::map<std::string, double> stage_seconds;  // traffic, power, layout, thermal, reliability, report
  std::string config_hash;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class StageTimer {
public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  template <typename F>
  auto run(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      sink_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
      auto r = f();
      sink_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return r;
    }
  }

private:
  std::map<std::string, double>& sink_;
};

// Per-layer router-mean grids for heatmap rendering.
inline std::vector<std::vector<double>> router_mean_grids(const std::vector<RegionTemp>& temps,
                                                         const MeshSpec& mesh) {
  std::vector<std::vector<double>> grids(mesh.nz, std::vector<double>(mesh.nx * mesh.ny, 0.0));
  for (const auto& rt : temps) {
    if (rt.part != Region::Part::Logic) continue;
    grids[rt.router.z][rt.router.y * mesh.nx + rt.router.x] = rt.mean_k;
  }
  return grids;
}

}  // namespace detail

// Runs traffic -> power -> layout -> thermal -> reliability for every benchmark
// and writes all CSV/SVG artifacts plus a run manifest.
inline ReportBundle run_pipeline(const PipelineConfig& config,
                                 const nlohmann::json& raw_config = {}) {
  config.validate();

  ReportBundle bundle;
  bundle.out_dir = config.output_dir;
  bundle.config_hash = detail::fnv1a_hex(raw_config.is_null() ? "" : raw_config.dump());
  for (const char* s : {"traffic", "power", "layout", "thermal", "reliability", "report"})
    bundle.stage_seconds[s] = 0.0;
  detail::StageTimer timer(bundle.stage_seconds);

  std::filesystem::create_directories(config.output_dir);

  // Geometry is benchmark-independent: build once.
  const auto [stack, grid] = timer.run("layout", [&] {
    const RouterTileLayout tile = config.build_tile_layout();
    ChipStack s = build_stack(tile, config.mesh, config.stack, config.pe_spacer_um2);
    ThermalGrid g = discretize(s, config.grid_resolution());
    return std::make_pair(std::move(s), std::move(g));
  });
  {
    std::ofstream fp(config.output_dir / "floorplan.txt");
    fp << floorplan_text(stack);
  }

  const AccelerationModel copper_model = BlackModel{config.copper_ea_ev, 1.0, 1.0};
  const AccelerationModel logic_model = BlackModel{config.logic_ea_ev, 1.0, 1.0};

  for (const BenchmarkSpec& spec : config.benchmarks) {
    BenchmarkReport rep;
    rep.name = spec.name;
    rep.dir = config.output_dir / spec.name;
    std::filesystem::create_directories(rep.dir);

    try {
      rep.traffic = timer.run("traffic", [&] {
        return spec.is_trace ? ingest_trace(spec.trace_path, config.mesh)
                             : gen_synthetic(spec.pattern, config.mesh, spec.name);
      });
      write_trace(rep.dir / "traffic.csv", rep.traffic);

      rep.power = timer.run("power", [&] {
        return power_map(rep.traffic, config.profile, config.mesh, config.target);
      });
      write_power_csv(rep.dir / "power.csv", rep.power);

      const TemperatureField field =
          timer.run("thermal", [&] { return solve_steady(grid, rep.power, config.solve); });
      rep.region_temps = region_temps(field, grid);
      write_temperature_csv(rep.dir / "temperature_cells.csv", field, grid);
      write_router_summary_csv(rep.dir / "router_summary.csv", rep.region_temps);
      write_region_temps_csv(rep.dir / "region_temps.csv", rep.region_temps);

      rep.reliability = timer.run("reliability", [&] {
        return mttf_map(rep.region_temps, copper_model, logic_model, config.reference_k);
      });
      write_reliability_csv(rep.dir / "reliability.csv", rep.reliability);
      write_defect_csv(rep.dir / "defects.csv", defect_map(rep.reliability, config.rate_threshold));

      timer.run("report", [&] {
        const auto grids = detail::router_mean_grids(rep.region_temps, config.mesh);
        for (int z = 0; z < config.mesh.nz; ++z)
          emit_heatmap(grids[z], config.mesh.nx, config.mesh.ny, "thermal",
                       rep.dir / ("heatmap_layer" + std::to_string(z) + ".svg"),
                       spec.name + " layer " + std::to_string(z) + " mean K");
      });
    } catch (const std::exception& e) {
      // Mark the benchmark directory incomplete rather than leaving partial
      // outputs that look valid.
      std::ofstream(rep.dir / "INCOMPLETE") << e.what() << "\n";
      throw solver_error("benchmark '" + spec.name + "' failed: " + e.what());
    }
    bundle.benchmarks.push_back(std::move(rep));
  }

  timer.run("report", [&] {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config_hash"] = bundle.config_hash;
    manifest["technology"] = to_string(config.stack.technology);
    manifest["mesh"] = {config.mesh.nx, config.mesh.ny, config.mesh.nz};
    manifest["grid_cells"] = grid.ncells();
    for (const auto& [stage, secs] : bundle.stage_seconds) manifest["stage_seconds"][stage] = secs;
    for (const auto& b : bundle.benchmarks) manifest["benchmarks"].push_back(b.name);
    std::ofstream out(config.output_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  });

  return bundle;
}

// ---------------------------------------------------------------------------
// Run comparison
// ---------------------------------------------------------------------------

struct RunData {
  std::filesystem::path dir;
  // benchmark -> region temps / reliability rows
  std::map<std::string, std::vector<RegionTemp>> temps;
  std::map<std::string, std::map<std::pair<Coord, int>, double>> mttf;  // (router, part) -> mttf
};

inline RunData load_run(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw input_error("not a run directory: " + dir.string());
  RunData run;
  run.dir = dir;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const auto rt_file = entry.path() / "region_temps.csv";
    if (!std::filesystem::exists(rt_file)) continue;
    const std::string bench = entry.path().filename().string();
    run.temps[bench] = read_region_temps_csv(rt_file);
  }
  if (run.temps.empty()) throw input_error("no benchmark outputs under " + dir.string());
  return run;
}

// Per-router temperature deltas and MTTF ratios of each run against a baseline.
inline void compare_runs(const std::filesystem::path& baseline_dir,
                         const std::vector<std::filesystem::path>& run_dirs,
                         const std::filesystem::path& out_dir, double reference_k,
                         double copper_ea_ev, double logic_ea_ev) {
  const RunData base = load_run(baseline_dir);
  std::filesystem::create_directories(out_dir);

  const AccelerationModel copper = BlackModel{copper_ea_ev, 1.0, 1.0};
  const AccelerationModel logic = BlackModel{logic_ea_ev, 1.0, 1.0};

  std::ostringstream os;
  char buf[256];
  os << "run,benchmark,x,y,z,layer,part,baseline_mean_k,run_mean_k,delta_k,mttf_ratio\n";

  for (const auto& rd : run_dirs) {
    const RunData run = load_run(rd);
    const std::string run_name = rd.filename().string();
    for (const auto& [bench, base_temps] : base.temps) {
      auto it = run.temps.find(bench);
      if (it == run.temps.end()) continue;
      const auto& run_temps = it->second;
      if (run_temps.size() != base_temps.size())
        throw input_error("compare: run '" + run_name + "' benchmark '" + bench +
                          "' has mismatched region count");

      MeshSpec mesh;
      mesh.nx = mesh.ny = mesh.nz = 1;
      for (const auto& rt : base_temps) {
        mesh.nx = std::max(mesh.nx, rt.router.x + 1);
        mesh.ny = std::max(mesh.ny, rt.router.y + 1);
        mesh.nz = std::max(mesh.nz, rt.router.z + 1);
      }
      std::vector<std::vector<double>> delta_grids(mesh.nz,
                                                   std::vector<double>(mesh.nx * mesh.ny, 0.0));

      for (std::size_t i = 0; i < base_temps.size(); ++i) {
        const RegionTemp& b = base_temps[i];
        const RegionTemp& r = run_temps[i];
        if (b.router != r.router || b.part != r.part)
          throw input_error("compare: region ordering mismatch in benchmark '" + bench + "'");
        const AccelerationModel& m = b.part == Region::Part::SignalTsv ? copper : logic;
        const double mttf_b = 1.0 / normalized_rate(m, b.mean_k, reference_k);
        const double mttf_r = 1.0 / normalized_rate(m, r.mean_k, reference_k);
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%d,%d,%s,%.9f,%.9f,%.9f,%.9g\n",
                      run_name.c_str(), bench.c_str(), b.router.x, b.router.y, b.router.z,
                      b.router.z, to_string(b.part), b.mean_k, r.mean_k, r.mean_k - b.mean_k,
                      mttf_r / mttf_b);
        os << buf;
        if (b.part == Region::Part::Logic)
          delta_grids[b.router.z][b.router.y * mesh.nx + b.router.x] = r.mean_k - b.mean_k;
      }
      for (int z = 0; z < mesh.nz; ++z)
        emit_heatmap(delta_grids[z], mesh.nx, mesh.ny, "thermal",
                     out_dir / (run_name + "_" + bench + "_delta_layer" + std::to_string(z) + ".svg"),
                     run_name + " - baseline, " + bench + " layer " + std::to_string(z));
    }
  }
  std::ofstream out(out_dir / "comparison.csv");
  if (!out) throw input_error("cannot write comparison csv");
  out << os.str();
}

}  // namespace noc3d
