// Command-line front end for the 3D-NoC power / thermal / reliability flow.
//
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noc3d/noc3d.hpp"

namespace fs = std::filesystem;
using namespace noc3d;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

PipelineConfig load_and_override(const CommonOpts& opts, nlohmann::json* raw_out = nullptr) {
  std::ifstream in(opts.config_path);
  if (!in) throw input_error("cannot open config file: " + opts.config_path);
  nlohmann::json raw;
  try {
    in >> raw;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("config json: ") + e.what());
  }
  if (opts.seed_set) raw["seed"] = opts.seed;
  if (!opts.out_dir.empty()) raw["output_dir"] = opts.out_dir;
  fs::path base = fs::path(opts.config_path).parent_path();
  if (base.empty()) base = ".";
  if (raw_out) *raw_out = raw;
  return config_from_json(raw, base);
}

// Rebuild geometry from config and solve one externally supplied power map.
void run_thermal_stage(const PipelineConfig& cfg, const PowerMap& pm, const fs::path& out) {
  fs::create_directories(out);
  const ChipStack stack = build_stack(cfg.build_tile_layout(), cfg.mesh, cfg.stack, cfg.pe_spacer_um2);
  const ThermalGrid grid = discretize(stack, cfg.grid_resolution());
  const TemperatureField field = solve_steady(grid, pm, cfg.solve);
  const auto temps = region_temps(field, grid);
  write_temperature_csv(out / "temperature_cells.csv", field, grid);
  write_router_summary_csv(out / "router_summary.csv", temps);
  write_region_temps_csv(out / "region_temps.csv", temps);
}

int run_heatmap(const std::string& in_csv, int layer, const std::string& out_svg,
                const std::string& palette) {
  std::ifstream in(in_csv);
  if (!in) throw input_error("cannot open temperature csv: " + in_csv);
  std::string line;
  int nx = 0, ny = 0;
  std::vector<std::tuple<int, int, double>> cells;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "layer,x,y,z,temp_k" || line.front() == '#') continue;
    int l = 0, x = 0, y = 0;
    double z = 0, t = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &l, &x, &y, &z, &t) != 5)
      throw parse_error("malformed temperature csv line", lineno);
    if (l != layer) continue;
    nx = std::max(nx, x + 1);
    ny = std::max(ny, y + 1);
    cells.emplace_back(x, y, t);
  }
  if (cells.empty()) throw input_error("no cells found for layer " + std::to_string(layer));
  std::vector<double> grid(static_cast<std::size_t>(nx) * ny, 0.0);
  for (const auto& [x, y, t] : cells) grid[y * nx + x] = t;
  emit_heatmap(grid, nx, ny, palette, out_svg, "layer " + std::to_string(layer));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D-NoC power, thermal and reliability prediction"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub, bool need_config = true) {
    auto* c = sub->add_option("--config", opts.config_path, "pipeline config file (JSON)");
    if (need_config) c->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the config random seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--threads", opts.threads, "max worker threads (stages currently run serially)");
  };

  auto* cmd_pipeline = app.add_subcommand("pipeline", "run the full flow for every benchmark");
  add_common(cmd_pipeline);

  auto* cmd_traffic = app.add_subcommand("traffic", "generate traffic summaries only");
  add_common(cmd_traffic);

  auto* cmd_power = app.add_subcommand("power", "convert a traffic trace to a power map");
  add_common(cmd_power);
  std::string trace_file, power_out = "power.csv";
  cmd_power->add_option("--trace", trace_file, "traffic trace file")->required();
  cmd_power->add_option("--power-out", power_out, "output power CSV path");

  auto* cmd_thermal = app.add_subcommand("thermal", "solve temperatures for a power CSV");
  add_common(cmd_thermal);
  std::string power_file;
  cmd_thermal->add_option("--power", power_file, "power map CSV")->required();

  auto* cmd_rel = app.add_subcommand("reliability", "map region temperatures to MTTF");
  add_common(cmd_rel);
  std::string temps_file;
  cmd_rel->add_option("--temps", temps_file, "region temperatures CSV")->required();

  auto* cmd_compare = app.add_subcommand("compare", "compare runs against a baseline");
  std::string baseline;
  std::vector<std::string> run_dirs;
  std::string compare_out = "compare_out";
  double cmp_ref = 323.15, cmp_cu = 1.0, cmp_logic = 0.7;
  cmd_compare->add_option("--config", opts.config_path,
                          "optional config supplying the reliability parameters");
  cmd_compare->add_option("--baseline", baseline, "baseline run directory")->required();
  cmd_compare->add_option("runs", run_dirs, "run directories to compare")->required();
  cmd_compare->add_option("--out", compare_out, "output directory");
  cmd_compare->add_option("--reference-k", cmp_ref, "MTTF reference temperature (K)");
  cmd_compare->add_option("--copper-ea", cmp_cu, "copper activation energy (eV)");
  cmd_compare->add_option("--logic-ea", cmp_logic, "logic activation energy (eV)");

  auto* cmd_heatmap = app.add_subcommand("heatmap", "render one layer of a temperature CSV as SVG");
  std::string hm_in, hm_out = "heatmap.svg", hm_palette = "thermal";
  int hm_layer = 0;
  cmd_heatmap->add_option("--in", hm_in, "temperature_cells.csv input")->required();
  cmd_heatmap->add_option("--layer", hm_layer, "layer (slab) index");
  cmd_heatmap->add_option("--out-svg", hm_out, "output SVG path");
  cmd_heatmap->add_option("--palette", hm_palette, "color ramp: thermal | gray");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad flags are configuration errors; --help stays exit 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // Configuration problems exit 1; failures inside a stage exit 2.
  PipelineConfig cfg;
  nlohmann::json raw;
  const bool config_optional = app.got_subcommand(cmd_compare) || app.got_subcommand(cmd_heatmap);
  if (!config_optional || !opts.config_path.empty()) {
    try {
      cfg = load_and_override(opts, &raw);
      if (app.got_subcommand(cmd_compare)) {
        if (!cmd_compare->count("--reference-k")) cmp_ref = cfg.reference_k;
        if (!cmd_compare->count("--copper-ea")) cmp_cu = cfg.copper_ea_ev;
        if (!cmd_compare->count("--logic-ea")) cmp_logic = cfg.logic_ea_ev;
      }
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
  }

  try {
    if (app.got_subcommand(cmd_pipeline)) {
      const ReportBundle bundle = run_pipeline(cfg, raw);
      std::cout << "pipeline complete: " << bundle.benchmarks.size() << " benchmark(s) -> "
                << bundle.out_dir.string() << "\n";
      for (const auto& [stage, secs] : bundle.stage_seconds)
        std::printf("  %-12s %8.3f s\n", stage.c_str(), secs);
    } else if (app.got_subcommand(cmd_traffic)) {
      fs::create_directories(cfg.output_dir);
      for (const auto& spec : cfg.benchmarks) {
        const TrafficSummary t = spec.is_trace ? ingest_trace(spec.trace_path, cfg.mesh)
                                               : gen_synthetic(spec.pattern, cfg.mesh, spec.name);
        write_trace(cfg.output_dir / (spec.name + "_traffic.csv"), t);
        std::cout << spec.name << ": " << t.total_bits() << " bits, " << t.duration_s << " s\n";
      }
    } else if (app.got_subcommand(cmd_power)) {
      const TrafficSummary t = ingest_trace(trace_file, cfg.mesh);
      const PowerMap pm = power_map(t, cfg.profile, cfg.mesh, cfg.target);
      write_power_csv(power_out, pm);
      std::cout << "total power: " << pm.total_w() << " W\n";
    } else if (app.got_subcommand(cmd_thermal)) {
      const PowerMap pm = read_power_csv(power_file);
      run_thermal_stage(cfg, pm, cfg.output_dir);
      std::cout << "thermal outputs written to " << cfg.output_dir.string() << "\n";
    } else if (app.got_subcommand(cmd_rel)) {
      fs::create_directories(cfg.output_dir);
      const auto temps = read_region_temps_csv(temps_file);
      const ReliabilityMap rel = mttf_map(temps, BlackModel{cfg.copper_ea_ev, 1.0, 1.0},
                                          BlackModel{cfg.logic_ea_ev, 1.0, 1.0}, cfg.reference_k);
      write_reliability_csv(cfg.output_dir / "reliability.csv", rel);
      write_defect_csv(cfg.output_dir / "defects.csv", defect_map(rel, cfg.rate_threshold));
      std::cout << "reliability outputs written to " << cfg.output_dir.string() << "\n";
    } else if (app.got_subcommand(cmd_compare)) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      compare_runs(baseline, dirs, compare_out, cmp_ref, cmp_cu, cmp_logic);
      std::cout << "comparison written to " << compare_out << "\n";
    } else if (app.got_subcommand(cmd_heatmap)) {
      run_heatmap(hm_in, hm_layer, hm_out, hm_palette);
      std::cout << "wrote " << hm_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
