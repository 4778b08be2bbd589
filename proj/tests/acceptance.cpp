// Acceptance gate: one check per numbered criterion, one PASS/FAIL line each.
// Usage: acceptance [--criterion N]   (no flag runs every criterion)
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "noc3d/noc3d.hpp"
#include "oracles.hpp"

using namespace noc3d;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::abs(b);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const std::vector<std::pair<double, double>> kRateTable = {
    {303.15, 0.011537},  {313.15, 0.039174}, {323.15, 0.123317}, {333.15, 0.362371},
    {343.15, 1.0},       {353.15, 2.605435}, {363.15, 6.439561}, {373.15, 13.94691}};

PowerMap flat_power(const MeshSpec& mesh, double static_w, double dynamic_w) {
  PowerMap pm;
  for (int z = 0; z < mesh.nz; ++z)
    for (int y = 0; y < mesh.ny; ++y)
      for (int x = 0; x < mesh.nx; ++x) pm.per_router[{x, y, z}] = RouterPower{static_w, dynamic_w};
  return pm;
}

double layer_mean(const std::vector<RegionTemp>& temps, int z) {
  double sum = 0;
  int n = 0;
  for (const auto& rt : temps)
    if (rt.part == Region::Part::Logic && rt.router.z == z) {
      sum += rt.mean_k;
      ++n;
    }
  return n ? sum / n : 0.0;
}

// Calibration router at 1.1 V / 2 GHz: the DVFS-scaled operating point used by
// the stack-technology and thermal-TSV studies.
RouterPower study_router_power() {
  RouterPowerProfile prof;
  return router_power(prof, 31360, 2.8232e-6, {1.1, 2e9});
}

// --------------------------------------------------------------------------

Check criterion1() {
  Check c;
  const double epb = energy_per_bit(2.9022496e-8, 31360);
  c.require(rel_close(epb, 9.2546e-13, 1e-4), "energy per bit " + fmt(epb));
  RouterPowerProfile prof;
  const auto p = router_power(prof, 31360, 2.8232e-6, prof.calib);
  c.require(rel_close(p.dynamic_w, 1.028e-2, 5e-4), "dynamic power " + fmt(p.dynamic_w));
  return c;
}

Check criterion2() {
  Check c;
  const double ring = 290.0 * 290 - 220.0 * 220;
  c.require(ring == 35700.0, "ring area " + fmt(ring));
  const Material tim{"TIM", 0.25, 4.0e6}, cu{"copper", 0.0025, 3.55e6};
  const double rho = composite_resistivity(ring, 0.1016 * ring, tim, cu);
  c.require(std::abs(rho - 0.0226) <= 2e-4, "composite resistivity " + fmt(rho));
  return c;
}

Check criterion3() {
  Check c;
  const double fit = fit_activation_energy(kRateTable, 343.15);
  c.require(std::abs(fit - 1.0) <= 1e-3, "fitted Ea " + fmt(fit) + " eV not 1.0 +/- 0.001");
  const AccelerationModel m = BlackModel{1.0, 1.0, 1.0};
  for (const auto& [t, r] : kRateTable) {
    const double got = normalized_rate(m, t, 343.15);
    c.require(rel_close(got, r, 1e-3),
              fmt(t) + " K -> " + fmt(got) + " (table " + fmt(r) + ")");
  }
  return c;
}

Check criterion4() {
  Check c;
  const OperatingPoint a{1.1, 500e6}, b{1.1, 2e9};
  c.require(scale_dynamic(1.0, a, b) == 4.0, "500 MHz -> 2 GHz factor not exactly 4");
  const OperatingPoint q{0.87, 1.7e9};
  c.require(std::abs(scale_dynamic(scale_dynamic(3.0, a, q), q, a) - 3.0) <= 1e-12,
            "dynamic round trip drift");
  c.require(std::abs(scale_static(scale_static(3.0, a, q), q, a) - 3.0) <= 1e-12,
            "static round trip drift");
  return c;
}

Check criterion5() {
  Check c;
  const auto start = std::chrono::steady_clock::now();

  // Analytic single cell and 1D rod on a uniform-material stack.
  StackParams p;
  p.materials.silicon = {"m", 0.01, 1.6e6};
  p.materials.copper = {"m", 0.01, 1.6e6};
  p.materials.tim = {"m", 0.01, 1.6e6};
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  for (int nz : {1, 4}) {
    MeshSpec mesh{1, 1, nz, 32, {1.1, 500e6}};
    const auto stack = build_stack(tile, mesh, p);
    const auto grid = discretize(stack, 1);
    const double P = 0.25;
    const auto f = solve_steady(grid, flat_power(mesh, 0.0, P));

    const double A = grid.dx_m * grid.dy_m;
    const int top = grid.nslabs - 1;
    double total = 0;
    std::vector<double> inject(grid.nslabs, 0.0);
    for (int s = 0; s < grid.nslabs; ++s)
      if (grid.slab_kind[s] == LayerKind::Silicon) {
        inject[s] = P;
        total += P;
      }
    std::vector<double> expect(grid.nslabs);
    expect[top] = p.ambient_k +
                  total * (0.01 * grid.slab_thickness_m[top] / 2 / A + p.sink_convection_k_per_w);
    double below = total;
    for (int s = top - 1; s >= 0; --s) {
      below -= inject[s + 1];
      expect[s] = expect[s + 1] +
                  below * 0.01 * (grid.slab_thickness_m[s] + grid.slab_thickness_m[s + 1]) / 2 / A;
    }
    for (int s = 0; s < grid.nslabs; ++s)
      c.require(rel_close(f.cell_temp_k[grid.cell(0, 0, s)], expect[s], 1e-9),
                "rod nz=" + std::to_string(nz) + " slab " + std::to_string(s));
  }

  // Randomized resistor networks against independent dense elimination.
  std::mt19937_64 rng(7177);
  std::uniform_real_distribution<double> cond(0.05, 20.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int cases = 0;
  for (int trial = 0; trial < 52; ++trial) {
    const int nx = 3 + static_cast<int>(unit(rng) * (trial % 10 == 0 ? 29 : 15));
    const int ny = 3 + static_cast<int>(unit(rng) * (trial % 10 == 0 ? 29 : 15));
    const int n = nx * ny;
    if (n > 1000) continue;
    std::map<std::pair<int, int>, double> e;
    auto add = [&](int a, int b, double g) {
      e[{a, a}] += g;
      e[{b, b}] += g;
      e[{a, b}] -= g;
      e[{b, a}] -= g;
    };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int cell = j * nx + i;
        if (i + 1 < nx) add(cell, cell + 1, cond(rng));
        if (j + 1 < ny) add(cell, cell + nx, cond(rng));
        if (unit(rng) < 0.25 || cell == 0) e[{cell, cell}] += cond(rng);
      }
    const CsrMatrix m(n, e);
    std::vector<double> b(n);
    for (double& v : b) v = unit(rng);
    const auto x = cg_solve(m, b, 1e-10, 50 * n);
    const auto ref = oracle::dense_solve(m.to_dense(), b);
    double worst = 0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(x[i] - ref[i]));
    c.require(worst <= 1e-6, "case " + std::to_string(trial) + " n=" + std::to_string(n) +
                                 " error " + fmt(worst));
    ++cases;
  }
  c.require(cases >= 50, "only " + std::to_string(cases) + " random cases");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  return c;
}

Check criterion6() {
  Check c;
  MeshSpec mesh{3, 3, 3, 32, {1.1, 500e6}};
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  StackParams params;
  const auto stack = build_stack(tile, mesh, params);
  const auto grid = discretize(stack, 18);
  RouterPowerProfile prof;

  for (PatternKind kind : {PatternKind::Uniform, PatternKind::Transpose, PatternKind::Matrix,
                           PatternKind::Hotspot}) {
    SyntheticPattern pat;
    pat.kind = kind;
    pat.seed = 5;
    if (kind == PatternKind::Hotspot) {
      pat.hotspot_nodes = {{1, 1, 1}};
      pat.hotspot_fraction = 0.05;
    }
    const auto traffic = gen_synthetic(pat, mesh);
    const auto pm = power_map(traffic, prof, mesh, {1.1, 2e9});
    const auto f = solve_steady(grid, pm);
    const double q = ambient_heat_flow_w(f, grid);
    c.require(rel_close(q, pm.total_w(), 1e-6),
              std::string(to_string(kind)) + ": ambient flow " + fmt(q) + " vs " +
                  fmt(pm.total_w()));
    c.require(f.min_k() >= grid.ambient_k,
              std::string(to_string(kind)) + ": min " + fmt(f.min_k()) + " below ambient");
  }
  return c;
}

Check criterion7() {
  Check c;
  MeshSpec mesh{3, 3, 3, 32, {1.1, 500e6}};
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  const auto rp = study_router_power();
  const auto pm = flat_power(mesh, rp.static_w, rp.dynamic_w);

  StackParams tsv_params;
  StackParams mono_params;
  mono_params.technology = StackTech::Monolithic;
  const auto tsv_stack = build_stack(tile, mesh, tsv_params);
  const auto mono_stack = build_stack(tile, mesh, mono_params);
  const auto tsv_grid = discretize(tsv_stack, 24);
  const auto mono_grid = discretize(mono_stack, 24);
  const auto tsv_temps = region_temps(solve_steady(tsv_grid, pm), tsv_grid);
  const auto mono_temps = region_temps(solve_steady(mono_grid, pm), mono_grid);

  const double gap = layer_mean(mono_temps, 0) - layer_mean(tsv_temps, 0);
  c.require(gap > 0, "monolithic bottom not hotter (gap " + fmt(gap) + " K)");
  c.require(gap >= 0.1 && gap <= 5.0, "gap " + fmt(gap) + " K outside [0.1, 5]");

  for (const auto* temps : {&tsv_temps, &mono_temps})
    for (int z = 0; z + 1 < mesh.nz; ++z)
      c.require(layer_mean(*temps, z) >= layer_mean(*temps, z + 1),
                "layer " + std::to_string(z) + " cooler than layer " + std::to_string(z + 1));
  return c;
}

Check criterion8() {
  Check c;
  MeshSpec mesh{3, 3, 3, 32, {1.1, 500e6}};
  const auto base_tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  const auto ttsv_tile = insert_thermal_tsvs(base_tile, 15, 10, all_corners());
  const auto rp = study_router_power();
  const auto pm = flat_power(mesh, rp.static_w, rp.dynamic_w);

  StackParams params;
  const auto base_stack = build_stack(base_tile, mesh, params);
  const auto ttsv_stack = build_stack(ttsv_tile, mesh, params);
  const auto base_grid = discretize(base_stack, 24);
  const auto ttsv_grid = discretize(ttsv_stack, 24);
  const auto base_temps = region_temps(solve_steady(base_grid, pm), base_grid);
  const auto ttsv_temps = region_temps(solve_steady(ttsv_grid, pm), ttsv_grid);

  const double bottom_drop = layer_mean(base_temps, 0) - layer_mean(ttsv_temps, 0);
  const double top_change = std::abs(layer_mean(base_temps, mesh.nz - 1) -
                                     layer_mean(ttsv_temps, mesh.nz - 1));
  c.require(bottom_drop > 0, "bottom layer not reduced (" + fmt(bottom_drop) + " K)");
  c.require(bottom_drop <= 1.0, "bottom drop " + fmt(bottom_drop) + " K above 1 K");
  c.require(top_change < 0.1, "top layer changed by " + fmt(top_change) + " K");
  return c;
}

Check criterion9() {
  Check c;
  const AccelerationModel m = BlackModel{1.0, 1.0, 1.0};
  const double gain = 1.0 / normalized_rate(m, 343.15, 353.15);
  c.require(rel_close(gain, 2.605435, 1e-3), "mttf gain " + fmt(gain));
  c.require(gain >= 2.0 && gain <= 3.0, "gain " + fmt(gain) + " outside 2x..3x band");
  return c;
}

Check criterion10() {
  Check c;
  const fs::path out = fs::temp_directory_path() / "noc3d_accept_perf";
  fs::remove_all(out);
  nlohmann::json j = {
      {"mesh", {{"dims", {4, 4, 4}}, {"voltage_v", 1.1}, {"frequency_hz", 500e6}}},
      {"benchmarks", {{{"name", "transpose"}, {"pattern", "transpose"}}}},
      {"output_dir", out.string()}};
  const auto config = config_from_json(j);

  const auto start = std::chrono::steady_clock::now();
  const auto bundle = run_pipeline(config, j);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.require(secs < 120.0, "pipeline took " + fmt(secs) + " s");

  nlohmann::json manifest;
  std::ifstream(out / "manifest.json") >> manifest;
  for (const char* stage : {"traffic", "power", "layout", "thermal", "reliability", "report"})
    c.require(manifest.at("stage_seconds").contains(stage),
              std::string("manifest missing stage ") + stage);
  c.require(bundle.benchmarks.size() == 1, "missing benchmark report");
  return c;
}

Check criterion11() {
  Check c;
  const fs::path out1 = fs::temp_directory_path() / "noc3d_accept_det1";
  const fs::path out2 = fs::temp_directory_path() / "noc3d_accept_det2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  nlohmann::json j = {
      {"mesh", {{"dims", {2, 2, 2}}, {"voltage_v", 1.1}, {"frequency_hz", 500e6}}},
      {"seed", 314},
      {"thermal", {{"resolution", 6}}},
      {"benchmarks",
       {{{"name", "uniform"}, {"pattern", "uniform"}, {"packets_per_source", 8}},
        {{"name", "hotspot"},
         {"pattern", "hotspot"},
         {"hotspot_fraction", 0.05},
         {"hotspot_nodes", {{1, 1, 1}}}}}},
      {"output_dir", out1.string()}};
  run_pipeline(config_from_json(j), j);
  j["output_dir"] = out2.string();
  run_pipeline(config_from_json(j), j);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  for (const char* bench : {"uniform", "hotspot"})
    for (const char* f : {"traffic.csv", "power.csv", "temperature_cells.csv",
                          "router_summary.csv", "region_temps.csv", "reliability.csv",
                          "defects.csv"}) {
      const fs::path rel = fs::path(bench) / f;
      c.require(slurp(out1 / rel) == slurp(out2 / rel), rel.string() + " differs");
    }
  return c;
}

const char* kSummaries[] = {
    "power calibration round trip",
    "composite TSV-region resistivity",
    "published fault-rate table reproduction",
    "DVFS dynamic-power scaling",
    "thermal solver oracle equivalence",
    "energy conservation and maximum principle",
    "stack technology comparison",
    "thermal TSV exploration",
    "MTTF mapping scale",
    "end-to-end pipeline performance",
    "deterministic reports",
};

Check run_criterion(int n) {
  switch (n) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6();
    case 7: return criterion7();
    case 8: return criterion8();
    case 9: return criterion9();
    case 10: return criterion10();
    case 11: return criterion11();
  }
  throw input_error("no such criterion: " + std::to_string(n));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      wanted.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (wanted.empty())
    for (int n = 1; n <= 11; ++n) wanted.push_back(n);

  int failures = 0;
  for (int n : wanted) {
    Check c;
    try {
      c = run_criterion(n);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failures;
    std::printf("criterion %2d: %s - %s%s%s\n", n, c.ok ? "PASS" : "FAIL", kSummaries[n - 1],
                c.detail.empty() ? "" : ": ", c.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
