#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "noc3d/core.hpp"

namespace noc3d {

struct Material {
  std::string name;
  double thermal_resistivity_mk_w = 0.0;   // meter-kelvin per watt
  double heat_capacity_j_m3k = 0.0;        // volumetric, transient solves only

  void validate() const {
    if (thermal_resistivity_mk_w <= 0)
      throw input_error("material '" + name + "': resistivity must be > 0");
    if (heat_capacity_j_m3k <= 0)
      throw input_error("material '" + name + "': heat capacity must be > 0");
  }
};

// Axis-aligned rectangle in micrometers, (x,y) = bottom-left corner.
struct Rect {
  double x = 0, y = 0, w = 0, h = 0;
  double area() const { return w * h; }
  double right() const { return x + w; }
  double top() const { return y + h; }

  bool intersects(const Rect& o) const {
    return x < o.right() && o.x < right() && y < o.top() && o.y < top();
  }
  Rect intersection(const Rect& o) const {
    const double x0 = std::max(x, o.x), y0 = std::max(y, o.y);
    const double x1 = std::min(right(), o.right()), y1 = std::min(top(), o.top());
    if (x1 <= x0 || y1 <= y0) return Rect{0, 0, 0, 0};
    return Rect{x0, y0, x1 - x0, y1 - y0};
  }
  bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.top() <= top();
  }
  Rect translated(double dx, double dy) const { return Rect{x + dx, y + dy, w, h}; }
};

// Subtracts `hole` from `r`, returning the remainder as up to four rectangles.
inline std::vector<Rect> rect_subtract(const Rect& r, const Rect& hole) {
  if (!r.intersects(hole)) return {r};
  const Rect c = r.intersection(hole);
  std::vector<Rect> out;
  if (c.y > r.y) out.push_back(Rect{r.x, r.y, r.w, c.y - r.y});                       // below
  if (c.top() < r.top()) out.push_back(Rect{r.x, c.top(), r.w, r.top() - c.top()});   // above
  if (c.x > r.x) out.push_back(Rect{r.x, c.y, c.x - r.x, c.h});                       // left
  if (c.right() < r.right()) out.push_back(Rect{c.right(), c.y, r.right() - c.right(), c.h});
  return out;
}

// Area-weighted parallel combination of a fill material with embedded TSV copper.
// The printed source formula subtracts the two conductance terms, which goes
// negative for realistic inputs; the parallel sum reproduces the published
// 0.0226 mK/W figure and is used here.
inline double composite_resistivity(double region_area, double tsv_area, const Material& fill,
                                    const Material& tsv) {
  fill.validate();
  tsv.validate();
  if (region_area <= 0) throw input_error("composite_resistivity: region area must be > 0");
  if (tsv_area < 0 || tsv_area > region_area)
    throw input_error("composite_resistivity: tsv area must lie in [0, region area]");
  return region_area / ((region_area - tsv_area) / fill.thermal_resistivity_mk_w +
                        tsv_area / tsv.thermal_resistivity_mk_w);
}

enum class TileStyle { Legacy, SeparatedTsv, SurroundTsv };

inline const char* to_string(TileStyle s) {
  switch (s) {
    case TileStyle::Legacy: return "legacy";
    case TileStyle::SeparatedTsv: return "separated_tsv";
    case TileStyle::SurroundTsv: return "surround_tsv";
  }
  return "?";
}

struct ThermalTsv {
  Rect rect;
  double keep_out_um = 0.0;
};

// One router tile: logic block, signal-TSV region, optional thermal TSVs.
struct RouterTileLayout {
  TileStyle style = TileStyle::SurroundTsv;
  double tile_w_um = 290, tile_h_um = 290;
  Rect logic;
  std::vector<Rect> tsv_rects;        // signal-TSV region (thermal TSVs carved out)
  double tsv_unit_um = 4.06;          // one TSV is tsv_unit x tsv_unit copper
  int tsv_count = 0;
  double signal_region_area_um2 = 0;  // ring area at build time, before carving
  std::vector<ThermalTsv> thermal_tsvs;

  double signal_copper_area_um2() const { return tsv_count * tsv_unit_um * tsv_unit_um; }
  double tsv_utilization() const {
    return signal_region_area_um2 > 0 ? signal_copper_area_um2() / signal_region_area_um2 : 0.0;
  }
  double tsv_region_area_um2() const {
    double a = 0;
    for (const auto& r : tsv_rects) a += r.area();
    return a;
  }
};

inline int tsv_count_for_utilization(double utilization, double region_area_um2,
                                     double unit_um) {
  return static_cast<int>(std::lround(utilization * region_area_um2 / (unit_um * unit_um)));
}

inline RouterTileLayout build_tile(TileStyle style, double tile_um, double logic_um,
                                   double tsv_unit_um, int tsv_count) {
  if (tile_um <= 0 || logic_um <= 0 || tsv_unit_um <= 0 || tsv_count < 0)
    throw input_error("build_tile: dimensions must be positive");
  if (logic_um >= tile_um) throw input_error("build_tile: logic does not fit in tile");

  RouterTileLayout t;
  t.style = style;
  t.tile_w_um = t.tile_h_um = tile_um;
  t.tsv_unit_um = tsv_unit_um;
  t.tsv_count = tsv_count;

  const double T = tile_um, L = logic_um;
  switch (style) {
    case TileStyle::SurroundTsv: {
      const double m = (T - L) / 2.0;
      t.logic = Rect{m, m, L, L};
      t.tsv_rects = {Rect{0, 0, T, m},       // bottom strip
                     Rect{0, T - m, T, m},   // top strip
                     Rect{0, m, m, L},       // left strip
                     Rect{T - m, m, m, L}};  // right strip
      break;
    }
    case TileStyle::SeparatedTsv: {
      t.logic = Rect{0, 0, L, L};
      t.tsv_rects = {Rect{L, 0, T - L, T},   // right block
                     Rect{0, L, L, T - L}};  // top block
      break;
    }
    case TileStyle::Legacy:
      // No published dimensions; same corner packing as separated, callers may
      // overwrite logic/tsv_rects for a specific legacy geometry.
      t.logic = Rect{0, 0, L, L};
      t.tsv_rects = {Rect{L, 0, T - L, T}, Rect{0, L, L, T - L}};
      break;
  }
  t.signal_region_area_um2 = t.tsv_region_area_um2();
  if (t.signal_copper_area_um2() > t.signal_region_area_um2 + 1e-9)
    throw input_error("build_tile: TSVs do not fit in the TSV region");
  return t;
}

enum class TileCorner { BottomLeft, BottomRight, TopLeft, TopRight };

inline const std::vector<TileCorner>& all_corners() {
  static const std::vector<TileCorner> c = {TileCorner::BottomLeft, TileCorner::BottomRight,
                                            TileCorner::TopLeft, TileCorner::TopRight};
  return c;
}

// Adds square thermal TSVs at the requested tile corners. The copper column
// spans all silicon and bonding layers and stops under the final TIM; the
// keep-out zone must stay clear of router logic.
inline RouterTileLayout insert_thermal_tsvs(const RouterTileLayout& tile, double size_um,
                                            double koz_um,
                                            const std::vector<TileCorner>& corners) {
  if (size_um < 0 || koz_um < 0) throw input_error("insert_thermal_tsvs: negative dimension");
  if (size_um == 0 || corners.empty()) return tile;
  if (size_um > tile.tile_w_um || size_um > tile.tile_h_um)
    throw input_error("insert_thermal_tsvs: thermal TSV larger than tile");

  RouterTileLayout out = tile;
  for (TileCorner corner : corners) {
    Rect r{0, 0, size_um, size_um};
    if (corner == TileCorner::BottomRight || corner == TileCorner::TopRight)
      r.x = tile.tile_w_um - size_um;
    if (corner == TileCorner::TopLeft || corner == TileCorner::TopRight)
      r.y = tile.tile_h_um - size_um;

    const Rect guard{r.x - koz_um, r.y - koz_um, r.w + 2 * koz_um, r.h + 2 * koz_um};
    if (guard.intersects(tile.logic))
      throw input_error("insert_thermal_tsvs: thermal TSV keep-out overlaps router logic");

    // Carve the thermal TSV footprint out of the signal-TSV region.
    std::vector<Rect> carved;
    double removed = 0;
    for (const auto& sr : out.tsv_rects) {
      removed += sr.intersection(r).area();
      for (const auto& piece : rect_subtract(sr, r)) carved.push_back(piece);
    }
    if (removed + 1e-9 < r.area())
      throw input_error("insert_thermal_tsvs: thermal TSV extends outside the TSV region");
    out.tsv_rects = std::move(carved);
    out.thermal_tsvs.push_back(ThermalTsv{r, koz_um});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full-chip floorplans and layer stacks
// ---------------------------------------------------------------------------

struct Region {
  enum class Part { Logic, SignalTsv, ThermalTsv, Spacer };
  std::string name;
  Rect rect;
  double resistivity_mk_w = 0.0;
  double heat_capacity_j_m3k = 0.0;
  Part part = Part::Spacer;
  std::optional<Coord> router;  // owning router, when part of a router tile
  bool powered = false;         // logic regions carry the router's power
};

enum class LayerKind { Silicon, Bonding, Interface, Spreader };

struct Layer {
  LayerKind kind = LayerKind::Silicon;
  double thickness_um = 0.0;
  Material background;          // fills everything not covered by a region
  std::vector<Region> regions;
  int silicon_z = -1;           // router z-plane for silicon layers
};

enum class StackTech { Tsv, Monolithic };

inline const char* to_string(StackTech t) {
  return t == StackTech::Tsv ? "tsv" : "monolithic";
}

struct StackMaterials {
  Material silicon{"silicon", 0.01, 1.75e6};
  Material copper{"copper", 0.0025, 3.55e6};
  Material tim{"TIM", 0.25, 4.0e6};
};

struct StackParams {
  StackTech technology = StackTech::Tsv;
  double silicon_thickness_um = 100.0;
  double bonding_thickness_um = 2.0;    // inter-die bond (TSV stacks only)
  double interface_thickness_um = 2.0;  // die-attach TIM under the spreader
  double spreader_thickness_um = 500.0;
  StackMaterials materials;
  double ambient_k = 318.15;
  double sink_convection_k_per_w = 0.1;

  void validate() const {
    if (silicon_thickness_um <= 0 || bonding_thickness_um <= 0 ||
        interface_thickness_um <= 0 || spreader_thickness_um <= 0)
      throw input_error("stack thicknesses must be > 0");
    if (ambient_k <= 0) throw input_error("ambient temperature must be > 0");
    if (sink_convection_k_per_w <= 0) throw input_error("sink convection resistance must be > 0");
    materials.silicon.validate();
    materials.copper.validate();
    materials.tim.validate();
  }
};

struct ChipStack {
  StackTech technology = StackTech::Tsv;
  std::vector<Layer> layers;  // bottom to top
  double chip_w_um = 0, chip_h_um = 0;
  double ambient_k = 318.15;
  double sink_convection_k_per_w = 0.1;
  MeshSpec mesh;
  int num_silicon_layers = 0;
};

namespace detail {

// Side of the square macro cell holding one router tile plus its PE spacer;
// macro area = tile area + spacer area exactly.
inline double macro_side_um(const RouterTileLayout& tile, double pe_spacer_um2) {
  return std::sqrt(tile.tile_w_um * tile.tile_h_um + pe_spacer_um2);
}

}  // namespace detail

// Lays out the X x Y router tiles of one silicon layer, with zero-power PE
// spacer regions filling the rest of each macro cell.
inline std::vector<Region> tile_chip(const RouterTileLayout& tile, const MeshSpec& mesh, int z,
                                     double pe_spacer_um2, const StackParams& params) {
  mesh.validate();
  params.validate();
  if (pe_spacer_um2 < 0) throw input_error("tile_chip: spacer area must be >= 0");
  if (z < 0 || z >= mesh.nz) throw input_error("tile_chip: layer index outside mesh");

  const StackMaterials& mat = params.materials;
  const bool mono = params.technology == StackTech::Monolithic;
  // Monolithic stacks have no copper vias: TSV placeholders become silicon.
  const Material& via_mat = mono ? mat.silicon : mat.copper;
  const double ring_rho =
      composite_resistivity(tile.signal_region_area_um2, tile.signal_copper_area_um2(), mat.tim, via_mat);
  const double f = tile.tsv_utilization();
  const double ring_cap = (1 - f) * mat.tim.heat_capacity_j_m3k + f * via_mat.heat_capacity_j_m3k;

  const double W = detail::macro_side_um(tile, pe_spacer_um2);
  const double T = tile.tile_w_um;

  std::vector<Region> out;
  for (int y = 0; y < mesh.ny; ++y) {
    for (int x = 0; x < mesh.nx; ++x) {
      const double ox = x * W, oy = y * W;
      const Coord rc{x, y, z};
      const std::string base =
          "L" + std::to_string(z) + "/R" + std::to_string(x) + "_" + std::to_string(y);

      out.push_back(Region{base + "/logic", tile.logic.translated(ox, oy),
                           mat.silicon.thermal_resistivity_mk_w, mat.silicon.heat_capacity_j_m3k,
                           Region::Part::Logic, rc, true});
      int i = 0;
      for (const auto& r : tile.tsv_rects)
        out.push_back(Region{base + "/tsv" + std::to_string(i++), r.translated(ox, oy), ring_rho,
                             ring_cap, Region::Part::SignalTsv, rc, false});
      i = 0;
      for (const auto& tt : tile.thermal_tsvs)
        out.push_back(Region{base + "/ttsv" + std::to_string(i++), tt.rect.translated(ox, oy),
                             via_mat.thermal_resistivity_mk_w, via_mat.heat_capacity_j_m3k,
                             Region::Part::ThermalTsv, rc, false});
      if (W > T) {
        out.push_back(Region{base + "/pe0", Rect{ox + T, oy, W - T, W},
                             mat.silicon.thermal_resistivity_mk_w, mat.silicon.heat_capacity_j_m3k,
                             Region::Part::Spacer, std::nullopt, false});
        out.push_back(Region{base + "/pe1", Rect{ox, oy + T, T, W - T},
                             mat.silicon.thermal_resistivity_mk_w, mat.silicon.heat_capacity_j_m3k,
                             Region::Part::Spacer, std::nullopt, false});
      }
    }
  }
  return out;
}

// Assembles the full layer stack, bottom to top. TSV stacks interleave bonding
// layers whose TSV footprints stay copper-composite; monolithic stacks drop the
// bonding layers and turn every via placeholder into silicon, keeping silicon
// thicknesses identical across the two variants.
inline ChipStack build_stack(const RouterTileLayout& tile, const MeshSpec& mesh,
                             const StackParams& params, double pe_spacer_um2 = 0.0) {
  mesh.validate();
  params.validate();
  const StackMaterials& mat = params.materials;
  const bool mono = params.technology == StackTech::Monolithic;
  const Material& via_mat = mono ? mat.silicon : mat.copper;
  const double ring_rho =
      composite_resistivity(tile.signal_region_area_um2, tile.signal_copper_area_um2(), mat.tim, via_mat);
  const double f = tile.tsv_utilization();
  const double ring_cap = (1 - f) * mat.tim.heat_capacity_j_m3k + f * via_mat.heat_capacity_j_m3k;

  const double W = detail::macro_side_um(tile, pe_spacer_um2);

  ChipStack stack;
  stack.technology = params.technology;
  stack.mesh = mesh;
  stack.num_silicon_layers = mesh.nz;
  stack.chip_w_um = mesh.nx * W;
  stack.chip_h_um = mesh.ny * W;
  stack.ambient_k = params.ambient_k;
  stack.sink_convection_k_per_w = params.sink_convection_k_per_w;

  auto bonding_layer = [&](int below_z) {
    Layer l;
    l.kind = LayerKind::Bonding;
    l.thickness_um = params.bonding_thickness_um;
    l.background = mat.tim;
    for (int y = 0; y < mesh.ny; ++y) {
      for (int x = 0; x < mesh.nx; ++x) {
        const double ox = x * W, oy = y * W;
        const std::string base = "B" + std::to_string(below_z) + "/R" + std::to_string(x) + "_" +
                                 std::to_string(y);
        int i = 0;
        for (const auto& r : tile.tsv_rects)
          l.regions.push_back(Region{base + "/tsv" + std::to_string(i++), r.translated(ox, oy),
                                     ring_rho, ring_cap, Region::Part::SignalTsv, std::nullopt,
                                     false});
        i = 0;
        for (const auto& tt : tile.thermal_tsvs)
          l.regions.push_back(Region{base + "/ttsv" + std::to_string(i++),
                                     tt.rect.translated(ox, oy), via_mat.thermal_resistivity_mk_w,
                                     via_mat.heat_capacity_j_m3k, Region::Part::ThermalTsv,
                                     std::nullopt, false});
      }
    }
    return l;
  };

  for (int z = 0; z < mesh.nz; ++z) {
    Layer si;
    si.kind = LayerKind::Silicon;
    si.thickness_um = params.silicon_thickness_um;
    si.background = mat.silicon;
    si.silicon_z = z;
    si.regions = tile_chip(tile, mesh, z, pe_spacer_um2, params);
    stack.layers.push_back(std::move(si));
    if (z + 1 < mesh.nz && !mono) stack.layers.push_back(bonding_layer(z));
  }

  Layer iface;
  iface.kind = LayerKind::Interface;
  iface.thickness_um = params.interface_thickness_um;
  iface.background = mat.tim;  // thermal TSVs stop below this layer
  stack.layers.push_back(std::move(iface));

  Layer spreader;
  spreader.kind = LayerKind::Spreader;
  spreader.thickness_um = params.spreader_thickness_um;
  spreader.background = mat.copper;
  stack.layers.push_back(std::move(spreader));

  return stack;
}

// Flat text export, one region per line, layer-sectioned, all lengths in meters.
inline std::string floorplan_text(const ChipStack& stack) {
  std::string out;
  char buf[256];
  int li = 0;
  for (const auto& layer : stack.layers) {
    const char* kind = layer.kind == LayerKind::Silicon    ? "silicon"
                       : layer.kind == LayerKind::Bonding  ? "bonding"
                       : layer.kind == LayerKind::Interface ? "interface"
                                                            : "spreader";
    std::snprintf(buf, sizeof(buf), "# layer %d %s thickness_m %.9g\n", li++, kind,
                  layer.thickness_um * 1e-6);
    out += buf;
    for (const auto& r : layer.regions) {
      std::snprintf(buf, sizeof(buf), "%s\t%.9g\t%.9g\t%.9g\t%.9g\n", r.name.c_str(),
                    r.rect.w * 1e-6, r.rect.h * 1e-6, r.rect.x * 1e-6, r.rect.y * 1e-6);
      out += buf;
    }
  }
  return out;
}

}  // namespace noc3d
