#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "noc3d/core.hpp"
#include "noc3d/layout.hpp"
#include "noc3d/power.hpp"
#include "noc3d/thermal.hpp"
#include "noc3d/traffic.hpp"

namespace noc3d {

struct BenchmarkSpec {
  std::string name;
  bool is_trace = false;
  SyntheticPattern pattern;           // synthetic benchmarks
  std::filesystem::path trace_path;   // trace benchmarks
};

struct PipelineConfig {
  MeshSpec mesh{3, 3, 3, 32, {1.1, 500e6}};
  RouterPowerProfile profile;
  OperatingPoint target{1.1, 500e6};
  std::vector<BenchmarkSpec> benchmarks;

  TileStyle style = TileStyle::SurroundTsv;
  double tile_um = 290.0;
  double logic_um = 220.0;
  double tsv_unit_um = 4.06;
  int tsv_count = 220;
  double pe_spacer_um2 = 0.0;

  bool thermal_tsvs_enabled = false;
  double ttsv_size_um = 15.0;
  double ttsv_koz_um = 10.0;
  int ttsv_corners = 4;

  StackParams stack;
  int resolution = 8;  // cells per router tile along x
  SolveOptions solve;

  double reference_k = 323.15;
  double copper_ea_ev = 1.0;
  double logic_ea_ev = 0.7;
  double rate_threshold = 1.0;

  std::uint64_t seed = 0;
  bool seed_set = false;
  std::filesystem::path output_dir = "out";

  RouterTileLayout build_tile_layout() const {
    RouterTileLayout t = build_tile(style, tile_um, logic_um, tsv_unit_um, tsv_count);
    if (thermal_tsvs_enabled) {
      std::vector<TileCorner> corners(all_corners().begin(),
                                      all_corners().begin() + std::min(ttsv_corners, 4));
      t = insert_thermal_tsvs(t, ttsv_size_um, ttsv_koz_um, corners);
    }
    return t;
  }

  int grid_resolution() const {  // cells across the whole chip in x
    return resolution * mesh.nx;
  }

  void validate() const {
    mesh.validate();
    profile.validate();
    stack.validate();
    if (benchmarks.empty()) throw input_error("config: no benchmarks");
    if (resolution < 1) throw input_error("config: resolution must be >= 1");
    if (reference_k <= 0) throw input_error("config: reference temperature must be > 0");
    if (copper_ea_ev <= 0 || logic_ea_ev <= 0)
      throw input_error("config: activation energies must be > 0");
    if (ttsv_corners < 0 || ttsv_corners > 4)
      throw input_error("config: thermal TSV corner count must be 0..4");
    for (const auto& b : benchmarks) {
      if (b.is_trace) {
        if (!std::filesystem::exists(b.trace_path))
          throw input_error("config: trace file not found: " + b.trace_path.string());
      } else {
        b.pattern.validate(mesh);
        const bool stochastic =
            b.pattern.kind == PatternKind::Uniform || b.pattern.kind == PatternKind::Hotspot;
        if (stochastic && !seed_set)
          throw input_error("config: seed is required for benchmark '" + b.name +
                            "' (randomized destinations)");
      }
    }
  }
};

namespace detail {

inline PatternKind pattern_from_string(const std::string& s) {
  if (s == "uniform") return PatternKind::Uniform;
  if (s == "transpose") return PatternKind::Transpose;
  if (s == "matrix") return PatternKind::Matrix;
  if (s == "hotspot") return PatternKind::Hotspot;
  throw input_error("unknown traffic pattern: " + s);
}

inline TileStyle style_from_string(const std::string& s) {
  if (s == "legacy") return TileStyle::Legacy;
  if (s == "separated_tsv") return TileStyle::SeparatedTsv;
  if (s == "surround_tsv") return TileStyle::SurroundTsv;
  throw input_error("unknown tile style: " + s);
}

inline Material material_from_json(const nlohmann::json& j, Material fallback) {
  Material m = fallback;
  if (j.contains("name")) m.name = j.at("name").get<std::string>();
  if (j.contains("resistivity_mk_w")) m.thermal_resistivity_mk_w = j.at("resistivity_mk_w");
  if (j.contains("heat_capacity_j_m3k")) m.heat_capacity_j_m3k = j.at("heat_capacity_j_m3k");
  return m;
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir = ".") {
  PipelineConfig c;
  try {
    if (j.contains("mesh")) {
      const auto& m = j.at("mesh");
      if (m.contains("dims")) {
        c.mesh.nx = m.at("dims").at(0);
        c.mesh.ny = m.at("dims").at(1);
        c.mesh.nz = m.at("dims").at(2);
      }
      if (m.contains("flit_width_bits")) c.mesh.flit_width_bits = m.at("flit_width_bits");
      if (m.contains("voltage_v")) c.mesh.operating_point.voltage_v = m.at("voltage_v");
      if (m.contains("frequency_hz")) c.mesh.operating_point.frequency_hz = m.at("frequency_hz");
    }
    if (j.contains("power_profile")) {
      const auto& p = j.at("power_profile");
      if (p.contains("static_power_w")) c.profile.static_power_w = p.at("static_power_w");
      if (p.contains("energy_per_bit_j")) c.profile.energy_per_bit_j = p.at("energy_per_bit_j");
      if (p.contains("calib_voltage_v")) c.profile.calib.voltage_v = p.at("calib_voltage_v");
      if (p.contains("calib_frequency_hz")) c.profile.calib.frequency_hz = p.at("calib_frequency_hz");
    }
    c.target = c.mesh.operating_point;
    if (j.contains("target_operating_point")) {
      const auto& t = j.at("target_operating_point");
      if (t.contains("voltage_v")) c.target.voltage_v = t.at("voltage_v");
      if (t.contains("frequency_hz")) c.target.frequency_hz = t.at("frequency_hz");
    }
    if (j.contains("seed")) {
      c.seed = j.at("seed").get<std::uint64_t>();
      c.seed_set = true;
    }
    if (j.contains("benchmarks")) {
      for (const auto& b : j.at("benchmarks")) {
        BenchmarkSpec spec;
        spec.name = b.at("name").get<std::string>();
        const std::string type = b.value("type", "synthetic");
        if (type == "trace") {
          spec.is_trace = true;
          spec.trace_path = base_dir / b.at("path").get<std::string>();
        } else if (type == "synthetic") {
          spec.pattern.kind = detail::pattern_from_string(b.at("pattern").get<std::string>());
          spec.pattern.packets_per_source = b.value("packets_per_source", 2);
          spec.pattern.flits_per_packet = b.value("flits_per_packet", 10);
          spec.pattern.hotspot_fraction = b.value("hotspot_fraction", 0.0);
          spec.pattern.seed = c.seed;
          if (b.contains("hotspot_nodes"))
            for (const auto& n : b.at("hotspot_nodes"))
              spec.pattern.hotspot_nodes.push_back(Coord{n.at(0), n.at(1), n.at(2)});
        } else {
          throw input_error("unknown benchmark type: " + type);
        }
        c.benchmarks.push_back(std::move(spec));
      }
    }
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      if (l.contains("style")) c.style = detail::style_from_string(l.at("style"));
      if (l.contains("tile_um")) c.tile_um = l.at("tile_um");
      if (l.contains("logic_um")) c.logic_um = l.at("logic_um");
      if (l.contains("tsv_unit_um")) c.tsv_unit_um = l.at("tsv_unit_um");
      if (l.contains("tsv_count")) c.tsv_count = l.at("tsv_count");
      if (l.contains("pe_spacer_um2")) c.pe_spacer_um2 = l.at("pe_spacer_um2");
      if (l.contains("thermal_tsvs")) {
        const auto& t = l.at("thermal_tsvs");
        c.thermal_tsvs_enabled = t.value("enabled", true);
        if (t.contains("size_um")) c.ttsv_size_um = t.at("size_um");
        if (t.contains("koz_um")) c.ttsv_koz_um = t.at("koz_um");
        if (t.contains("corners")) c.ttsv_corners = t.at("corners");
      }
    }
    if (j.contains("stack")) {
      const auto& s = j.at("stack");
      if (s.contains("technology"))
        c.stack.technology = s.at("technology").get<std::string>() == "monolithic"
                                 ? StackTech::Monolithic
                                 : StackTech::Tsv;
      if (s.contains("silicon_thickness_um")) c.stack.silicon_thickness_um = s.at("silicon_thickness_um");
      if (s.contains("bonding_thickness_um")) c.stack.bonding_thickness_um = s.at("bonding_thickness_um");
      if (s.contains("interface_thickness_um"))
        c.stack.interface_thickness_um = s.at("interface_thickness_um");
      if (s.contains("spreader_thickness_um")) c.stack.spreader_thickness_um = s.at("spreader_thickness_um");
      if (s.contains("ambient_k")) c.stack.ambient_k = s.at("ambient_k");
      if (s.contains("sink_convection_k_per_w"))
        c.stack.sink_convection_k_per_w = s.at("sink_convection_k_per_w");
      if (s.contains("materials")) {
        const auto& m = s.at("materials");
        if (m.contains("silicon"))
          c.stack.materials.silicon = detail::material_from_json(m.at("silicon"), c.stack.materials.silicon);
        if (m.contains("copper"))
          c.stack.materials.copper = detail::material_from_json(m.at("copper"), c.stack.materials.copper);
        if (m.contains("tim"))
          c.stack.materials.tim = detail::material_from_json(m.at("tim"), c.stack.materials.tim);
      }
    }
    if (j.contains("thermal")) {
      const auto& t = j.at("thermal");
      if (t.contains("resolution")) c.resolution = t.at("resolution");
      if (t.contains("tolerance")) c.solve.tolerance = t.at("tolerance");
      if (t.contains("solver")) {
        const std::string s = t.at("solver");
        c.solve.method = s == "direct"      ? SolveMethod::Direct
                         : s == "iterative" ? SolveMethod::Iterative
                                            : SolveMethod::Auto;
      }
    }
    if (j.contains("reliability")) {
      const auto& r = j.at("reliability");
      if (r.contains("reference_k")) c.reference_k = r.at("reference_k");
      if (r.contains("copper_ea_ev")) c.copper_ea_ev = r.at("copper_ea_ev");
      if (r.contains("logic_ea_ev")) c.logic_ea_ev = r.at("logic_ea_ev");
      if (r.contains("rate_threshold")) c.rate_threshold = r.at("rate_threshold");
    }
    if (j.contains("output_dir")) c.output_dir = base_dir / j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("config json: ") + e.what());
  }
  return config_from_json(j, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace noc3d
