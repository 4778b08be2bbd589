#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "noc3d/core.hpp"
#include "noc3d/layout.hpp"
#include "noc3d/power.hpp"
#include "noc3d/sparse.hpp"

namespace noc3d {

// 3D thermal conductance network over a discretized chip stack. One cell slab
// per stack layer, uniform lateral grid, per-cell area-weighted material mix.
struct ThermalGrid {
  int nx = 0, ny = 0, nslabs = 0;
  double dx_m = 0, dy_m = 0;
  std::vector<double> slab_thickness_m;
  std::vector<LayerKind> slab_kind;
  std::vector<int> slab_silicon_z;
  std::vector<double> resistivity;     // per cell, m.K/W (parallel-mixed)
  std::vector<double> heat_capacity;   // per cell, J/(m^3.K)
  CsrMatrix conductance;               // ambient coupling folded into the diagonal
  std::vector<double> ambient_conductance;  // per cell, W/K
  double ambient_k = 0;
  int unresolved_regions = 0;          // regions smaller than one cell, mixed in

  // Power binding: router -> (cell, weight), weights sum to 1 per router.
  std::map<Coord, std::vector<std::pair<int, double>>> power_cells;

  // Aggregation support: cells overlapped by each router region group.
  struct RegionCells {
    Coord router;
    Region::Part part = Region::Part::Logic;
    std::vector<std::pair<int, double>> cells;  // (cell, overlap area m^2)
  };
  std::vector<RegionCells> region_cells;

  int ncells() const { return nx * ny * nslabs; }
  int cell(int i, int j, int s) const { return (s * ny + j) * nx + i; }
};

struct TemperatureField {
  std::vector<double> cell_temp_k;
  double ambient_k = 0;
  int nx = 0, ny = 0, nslabs = 0;
  SolveReport solve;

  double min_k() const { return *std::min_element(cell_temp_k.begin(), cell_temp_k.end()); }
  double max_k() const { return *std::max_element(cell_temp_k.begin(), cell_temp_k.end()); }
};

enum class SolveMethod { Auto, Iterative, Direct };

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  double tolerance = 1e-10;      // relative residual
  int direct_threshold = 1500;   // Auto switches to dense Cholesky below this
};

inline ThermalGrid discretize(const ChipStack& stack, int resolution) {
  if (resolution < 1) throw input_error("discretize: resolution must be >= 1");
  if (stack.layers.empty()) throw input_error("discretize: empty stack");
  if (stack.chip_w_um <= 0 || stack.chip_h_um <= 0)
    throw input_error("discretize: chip has zero extent");

  ThermalGrid g;
  g.nx = resolution;
  g.ny = std::max(1, static_cast<int>(std::lround(resolution * stack.chip_h_um / stack.chip_w_um)));
  g.nslabs = static_cast<int>(stack.layers.size());
  g.dx_m = stack.chip_w_um * 1e-6 / g.nx;
  g.dy_m = stack.chip_h_um * 1e-6 / g.ny;
  g.ambient_k = stack.ambient_k;

  const double cell_area = g.dx_m * g.dy_m;
  const double chip_area = cell_area * g.nx * g.ny;
  g.resistivity.assign(g.ncells(), 0.0);
  g.heat_capacity.assign(g.ncells(), 0.0);

  // Per-cell material mixing: parallel conductance weighting by overlap area.
  for (int s = 0; s < g.nslabs; ++s) {
    const Layer& layer = stack.layers[s];
    g.slab_thickness_m.push_back(layer.thickness_um * 1e-6);
    g.slab_kind.push_back(layer.kind);
    g.slab_silicon_z.push_back(layer.silicon_z);

    std::vector<double> inv_rho_area(g.nx * g.ny, 0.0);
    std::vector<double> cap_area(g.nx * g.ny, 0.0);
    std::vector<double> covered(g.nx * g.ny, 0.0);

    auto splat = [&](const Rect& r_um, double rho, double cap) {
      const double x0 = r_um.x * 1e-6, y0 = r_um.y * 1e-6;
      const double x1 = r_um.right() * 1e-6, y1 = r_um.top() * 1e-6;
      const int i0 = std::clamp(static_cast<int>(x0 / g.dx_m), 0, g.nx - 1);
      const int i1 = std::clamp(static_cast<int>(std::ceil(x1 / g.dx_m)), 1, g.nx);
      const int j0 = std::clamp(static_cast<int>(y0 / g.dy_m), 0, g.ny - 1);
      const int j1 = std::clamp(static_cast<int>(std::ceil(y1 / g.dy_m)), 1, g.ny);
      for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) {
          const double ox = std::max(0.0, std::min(x1, (i + 1) * g.dx_m) - std::max(x0, i * g.dx_m));
          const double oy = std::max(0.0, std::min(y1, (j + 1) * g.dy_m) - std::max(y0, j * g.dy_m));
          const double a = ox * oy;
          if (a <= 0) continue;
          inv_rho_area[j * g.nx + i] += a / rho;
          cap_area[j * g.nx + i] += a * cap;
          covered[j * g.nx + i] += a;
        }
      }
    };

    for (const Region& r : layer.regions) {
      if (r.rect.area() < cell_area) g.unresolved_regions++;
      splat(r.rect, r.resistivity_mk_w, r.heat_capacity_j_m3k);
    }

    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int c = j * g.nx + i;
        const double rest = std::max(0.0, cell_area - covered[c]);
        const double ira = inv_rho_area[c] + rest / layer.background.thermal_resistivity_mk_w;
        const double ca = cap_area[c] + rest * layer.background.heat_capacity_j_m3k;
        g.resistivity[g.cell(i, j, s)] = cell_area / ira;
        g.heat_capacity[g.cell(i, j, s)] = ca / cell_area;
      }
    }
  }

  // Power bindings and aggregation cells come from the silicon layers.
  std::map<std::pair<Coord, int>, std::size_t> group_index;  // (router, part) -> slot
  for (int s = 0; s < g.nslabs; ++s) {
    const Layer& layer = stack.layers[s];
    if (layer.kind != LayerKind::Silicon) continue;
    for (const Region& r : layer.regions) {
      if (!r.router) continue;
      const double x0 = r.rect.x * 1e-6, y0 = r.rect.y * 1e-6;
      const double x1 = r.rect.right() * 1e-6, y1 = r.rect.top() * 1e-6;
      const int i0 = std::clamp(static_cast<int>(x0 / g.dx_m), 0, g.nx - 1);
      const int i1 = std::clamp(static_cast<int>(std::ceil(x1 / g.dx_m)), 1, g.nx);
      const int j0 = std::clamp(static_cast<int>(y0 / g.dy_m), 0, g.ny - 1);
      const int j1 = std::clamp(static_cast<int>(std::ceil(y1 / g.dy_m)), 1, g.ny);

      const auto key = std::make_pair(*r.router, static_cast<int>(r.part));
      auto [it, inserted] = group_index.try_emplace(key, g.region_cells.size());
      if (inserted)
        g.region_cells.push_back(ThermalGrid::RegionCells{*r.router, r.part, {}});
      auto& cells = g.region_cells[it->second].cells;

      for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) {
          const double ox = std::max(0.0, std::min(x1, (i + 1) * g.dx_m) - std::max(x0, i * g.dx_m));
          const double oy = std::max(0.0, std::min(y1, (j + 1) * g.dy_m) - std::max(y0, j * g.dy_m));
          const double a = ox * oy;
          if (a <= 0) continue;
          const int c = g.cell(i, j, s);
          cells.emplace_back(c, a);
          if (r.powered) g.power_cells[*r.router].emplace_back(c, a / (r.rect.area() * 1e-12));
        }
      }
    }
  }
  // Merge duplicate cell entries and keep deterministic ordering.
  for (auto& [rc, cells] : g.power_cells) {
    std::map<int, double> merged;
    for (const auto& [c, w] : cells) merged[c] += w;
    cells.assign(merged.begin(), merged.end());
  }
  for (auto& rg : g.region_cells) {
    std::map<int, double> merged;
    for (const auto& [c, a] : rg.cells) merged[c] += a;
    rg.cells.assign(merged.begin(), merged.end());
  }

  // Conductance assembly. Lateral: series half-cells; vertical: series
  // half-thicknesses; top slab couples to the ambient node through the sink
  // convection resistance, apportioned by cell area.
  std::map<std::pair<int, int>, double> entries;
  auto add = [&](int a, int b, double cond) {
    entries[{a, a}] += cond;
    entries[{b, b}] += cond;
    entries[{a, b}] -= cond;
    entries[{b, a}] -= cond;
  };

  for (int s = 0; s < g.nslabs; ++s) {
    const double t = g.slab_thickness_m[s];
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int c = g.cell(i, j, s);
        if (i + 1 < g.nx) {
          const int c2 = g.cell(i + 1, j, s);
          const double r = (g.resistivity[c] + g.resistivity[c2]) * g.dx_m / 2.0 / (g.dy_m * t);
          add(c, c2, 1.0 / r);
        }
        if (j + 1 < g.ny) {
          const int c2 = g.cell(i, j + 1, s);
          const double r = (g.resistivity[c] + g.resistivity[c2]) * g.dy_m / 2.0 / (g.dx_m * t);
          add(c, c2, 1.0 / r);
        }
        if (s + 1 < g.nslabs) {
          const int c2 = g.cell(i, j, s + 1);
          const double r = (g.resistivity[c] * t / 2.0 +
                            g.resistivity[c2] * g.slab_thickness_m[s + 1] / 2.0) /
                           cell_area;
          add(c, c2, 1.0 / r);
        }
      }
    }
  }

  g.ambient_conductance.assign(g.ncells(), 0.0);
  const int top = g.nslabs - 1;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell(i, j, top);
      const double r_half = g.resistivity[c] * g.slab_thickness_m[top] / 2.0 / cell_area;
      const double r_conv = stack.sink_convection_k_per_w * chip_area / cell_area;
      const double cond = 1.0 / (r_half + r_conv);
      g.ambient_conductance[c] = cond;
      entries[{c, c}] += cond;
    }
  }

  g.conductance = CsrMatrix(g.ncells(), entries);
  return g;
}

namespace detail {

inline std::vector<double> solve_spd(const CsrMatrix& m, const std::vector<double>& b,
                                     const SolveOptions& opt, SolveReport& report) {
  const int n = m.rows();
  const bool direct = opt.method == SolveMethod::Direct ||
                      (opt.method == SolveMethod::Auto && n <= opt.direct_threshold);
  if (direct) {
    auto x = cholesky_solve(m.to_dense(), b);
    report = SolveReport{0, 0.0, true, true};
    return x;
  }
  return cg_solve(m, b, opt.tolerance, 50 * n, &report);
}

}  // namespace detail

inline TemperatureField solve_steady(const ThermalGrid& grid, const PowerMap& power,
                                     const SolveOptions& opt = {}) {
  std::vector<double> b(grid.ncells(), 0.0);
  for (const auto& [rc, p] : power.per_router) {
    auto it = grid.power_cells.find(rc);
    if (it == grid.power_cells.end())
      throw input_error("solve_steady: no power binding for router " + to_string(rc));
    const double total = p.total_w();
    if (total < 0) throw input_error("solve_steady: negative power at " + to_string(rc));
    for (const auto& [cell, w] : it->second) b[cell] += total * w;
  }
  for (int c = 0; c < grid.ncells(); ++c) b[c] += grid.ambient_conductance[c] * grid.ambient_k;

  TemperatureField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.nslabs = grid.nslabs;
  f.ambient_k = grid.ambient_k;
  f.cell_temp_k = detail::solve_spd(grid.conductance, b, opt, f.solve);
  return f;
}

// Backward-Euler transient: (C/dt + G) T' = P + ambient + (C/dt) T.
inline std::vector<TemperatureField> solve_transient(const ThermalGrid& grid,
                                                     const std::vector<PowerMap>& power_trace,
                                                     double dt_s, const TemperatureField& t_init,
                                                     const SolveOptions& opt = {}) {
  if (dt_s <= 0) throw input_error("solve_transient: dt must be > 0");
  if (power_trace.empty()) throw input_error("solve_transient: empty power trace");
  if (static_cast<int>(t_init.cell_temp_k.size()) != grid.ncells())
    throw input_error("solve_transient: initial field does not match grid");

  const double cell_area = grid.dx_m * grid.dy_m;
  std::vector<double> c_over_dt(grid.ncells());
  for (int s = 0; s < grid.nslabs; ++s) {
    const double vol = cell_area * grid.slab_thickness_m[s];
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const int c = grid.cell(i, j, s);
        c_over_dt[c] = grid.heat_capacity[c] * vol / dt_s;
      }
  }

  // G with the capacitance term folded into the diagonal.
  const CsrMatrix a = grid.conductance.with_diagonal_shift(c_over_dt);

  std::vector<TemperatureField> out;
  std::vector<double> t = t_init.cell_temp_k;
  for (const PowerMap& pm : power_trace) {
    std::vector<double> b(grid.ncells(), 0.0);
    for (const auto& [rc, p] : pm.per_router) {
      auto it = grid.power_cells.find(rc);
      if (it == grid.power_cells.end())
        throw input_error("solve_transient: no power binding for router " + to_string(rc));
      for (const auto& [cell, w] : it->second) b[cell] += p.total_w() * w;
    }
    for (int c = 0; c < grid.ncells(); ++c)
      b[c] += grid.ambient_conductance[c] * grid.ambient_k + c_over_dt[c] * t[c];

    TemperatureField f;
    f.nx = grid.nx;
    f.ny = grid.ny;
    f.nslabs = grid.nslabs;
    f.ambient_k = grid.ambient_k;
    f.cell_temp_k = detail::solve_spd(a, b, opt, f.solve);
    t = f.cell_temp_k;
    out.push_back(std::move(f));
  }
  return out;
}

struct RegionTemp {
  Coord router;
  Region::Part part = Region::Part::Logic;
  double mean_k = 0;
  double max_k = 0;
};

inline const char* to_string(Region::Part p) {
  switch (p) {
    case Region::Part::Logic: return "logic";
    case Region::Part::SignalTsv: return "tsv";
    case Region::Part::ThermalTsv: return "thermal_tsv";
    case Region::Part::Spacer: return "spacer";
  }
  return "?";
}

// Area-weighted mean and max temperature over each router region group.
inline std::vector<RegionTemp> region_temps(const TemperatureField& field,
                                            const ThermalGrid& grid) {
  if (static_cast<int>(field.cell_temp_k.size()) != grid.ncells())
    throw input_error("region_temps: field does not match grid");
  std::vector<RegionTemp> out;
  for (const auto& rg : grid.region_cells) {
    if (rg.part != Region::Part::Logic && rg.part != Region::Part::SignalTsv) continue;
    double wsum = 0, tsum = 0, tmax = -1;
    for (const auto& [c, a] : rg.cells) {
      wsum += a;
      tsum += a * field.cell_temp_k[c];
      tmax = std::max(tmax, field.cell_temp_k[c]);
    }
    if (wsum <= 0) continue;
    out.push_back(RegionTemp{rg.router, rg.part, tsum / wsum, tmax});
  }
  std::sort(out.begin(), out.end(), [](const RegionTemp& a, const RegionTemp& b) {
    if (a.router != b.router) return a.router < b.router;
    return static_cast<int>(a.part) < static_cast<int>(b.part);
  });
  return out;
}

// Total heat flowing into the ambient node; equals injected power at steady state.
inline double ambient_heat_flow_w(const TemperatureField& field, const ThermalGrid& grid) {
  double q = 0;
  for (int c = 0; c < grid.ncells(); ++c)
    q += grid.ambient_conductance[c] * (field.cell_temp_k[c] - grid.ambient_k);
  return q;
}

// CSV exports -----------------------------------------------------------------

inline void write_temperature_csv(const std::filesystem::path& file, const TemperatureField& f,
                                  const ThermalGrid& grid) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write temperature csv: " + file.string());
  std::ostringstream os;
  char buf[128];
  os << "layer,x,y,z,temp_k\n";
  double z0 = 0;
  for (int s = 0; s < grid.nslabs; ++s) {
    const double zmid = z0 + grid.slab_thickness_m[s] / 2.0;
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.9g,%.9f\n", s, i, j, zmid,
                      f.cell_temp_k[grid.cell(i, j, s)]);
        os << buf;
      }
    z0 += grid.slab_thickness_m[s];
  }
  out << os.str();
}

inline void write_router_summary_csv(const std::filesystem::path& file,
                                     const std::vector<RegionTemp>& temps) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write summary csv: " + file.string());
  std::ostringstream os;
  char buf[160];
  os << "x,y,z,layer,mean_k,max_k\n";
  for (const auto& rt : temps) {
    if (rt.part != Region::Part::Logic) continue;
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.9f,%.9f\n", rt.router.x, rt.router.y,
                  rt.router.z, rt.router.z, rt.mean_k, rt.max_k);
    os << buf;
  }
  out << os.str();
}

inline void write_region_temps_csv(const std::filesystem::path& file,
                                   const std::vector<RegionTemp>& temps) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write region temps csv: " + file.string());
  std::ostringstream os;
  char buf[160];
  os << "x,y,z,layer,part,mean_k,max_k\n";
  for (const auto& rt : temps) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%s,%.9f,%.9f\n", rt.router.x, rt.router.y,
                  rt.router.z, rt.router.z, to_string(rt.part), rt.mean_k, rt.max_k);
    os << buf;
  }
  out << os.str();
}

inline std::vector<RegionTemp> read_region_temps_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw input_error("cannot open region temps csv: " + file.string());
  std::vector<RegionTemp> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "x,y,z,layer,part,mean_k,max_k" || line.front() == '#') continue;
    RegionTemp rt;
    int layer = 0;
    char part[32] = {0};
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%31[^,],%lf,%lf", &rt.router.x, &rt.router.y,
                    &rt.router.z, &layer, part, &rt.mean_k, &rt.max_k) != 7)
      throw parse_error("malformed region temps line: '" + line + "'", lineno);
    rt.part = std::string(part) == "tsv" ? Region::Part::SignalTsv : Region::Part::Logic;
    out.push_back(rt);
  }
  return out;
}

}  // namespace noc3d
