#include <catch_amalgamated.hpp>

#include <random>

#include "noc3d/thermal.hpp"
#include "oracles.hpp"

using namespace noc3d;

namespace {

// Stack whose three materials share one resistivity, so every cell mixes to the
// same value and vertical heat flow has a closed form.
StackParams uniform_params(double rho = 0.01) {
  StackParams p;
  p.materials.silicon = {"m", rho, 1.6e6};
  p.materials.copper = {"m", rho, 1.6e6};
  p.materials.tim = {"m", rho, 1.6e6};
  return p;
}

ChipStack small_stack(int nz, const StackParams& p) {
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  MeshSpec mesh{1, 1, nz, 32, {1.1, 500e6}};
  return build_stack(tile, mesh, p);
}

PowerMap uniform_power(const MeshSpec& mesh, double w_per_router) {
  PowerMap pm;
  for (int z = 0; z < mesh.nz; ++z)
    for (int y = 0; y < mesh.ny; ++y)
      for (int x = 0; x < mesh.nx; ++x) pm.per_router[{x, y, z}] = RouterPower{0.0, w_per_router};
  return pm;
}

// Random positive-weight resistor network on an nx x ny grid with grounded
// cells, same structural family as the thermal matrices.
CsrMatrix random_network(int nx, int ny, std::mt19937_64& rng, std::vector<double>* b_out) {
  std::uniform_real_distribution<double> cond(0.1, 10.0);
  std::uniform_real_distribution<double> load(0.0, 1.0);
  std::map<std::pair<int, int>, double> e;
  auto add = [&](int a, int b, double g) {
    e[{a, a}] += g;
    e[{b, b}] += g;
    e[{a, b}] -= g;
    e[{b, a}] -= g;
  };
  const int n = nx * ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      if (i + 1 < nx) add(c, c + 1, cond(rng));
      if (j + 1 < ny) add(c, c + nx, cond(rng));
      if (load(rng) < 0.3 || c == 0) e[{c, c}] += cond(rng);  // ground tie
    }
  b_out->assign(n, 0.0);
  for (int c = 0; c < n; ++c) (*b_out)[c] = load(rng);
  return CsrMatrix(n, e);
}

}  // namespace

TEST_CASE("single-cell column matches the series-resistance closed form") {
  const auto p = uniform_params();
  const auto stack = small_stack(1, p);
  const auto grid = discretize(stack, 1);
  REQUIRE(grid.ncells() == 3);  // silicon, interface, spreader

  const double P = 0.5;
  PowerMap pm;
  pm.per_router[{0, 0, 0}] = RouterPower{0.0, P};
  const auto f = solve_steady(grid, pm);

  const double A = grid.dx_m * grid.dy_m;
  const double rho = 0.01;
  const double t0 = 100e-6, t1 = 2e-6, t2 = 500e-6;
  const double T2 = p.ambient_k + P * (rho * t2 / 2 / A + p.sink_convection_k_per_w);
  const double T1 = T2 + P * rho * (t1 + t2) / 2 / A;
  const double T0 = T1 + P * rho * (t0 + t1) / 2 / A;
  CHECK(f.cell_temp_k[grid.cell(0, 0, 0)] == Catch::Approx(T0).epsilon(1e-9));
  CHECK(f.cell_temp_k[grid.cell(0, 0, 1)] == Catch::Approx(T1).epsilon(1e-9));
  CHECK(f.cell_temp_k[grid.cell(0, 0, 2)] == Catch::Approx(T2).epsilon(1e-9));
}

TEST_CASE("1D rod with distributed injection matches cumulative-flow solution") {
  const auto p = uniform_params();
  const auto stack = small_stack(3, p);
  const auto grid = discretize(stack, 1);
  REQUIRE(grid.ncells() == 7);

  const double P = 0.2;
  const auto pm = uniform_power(stack.mesh, P);
  const auto f = solve_steady(grid, pm);

  const double A = grid.dx_m * grid.dy_m;
  const double rho = 0.01;
  // Heat crossing the top of slab s is the power injected at or below it.
  std::vector<double> inject(grid.nslabs, 0.0);
  for (int s = 0; s < grid.nslabs; ++s)
    if (grid.slab_kind[s] == LayerKind::Silicon) inject[s] = P;
  const int top = grid.nslabs - 1;
  std::vector<double> expect(grid.nslabs);
  double total = 0;
  for (double v : inject) total += v;
  expect[top] = p.ambient_k +
                total * (rho * grid.slab_thickness_m[top] / 2 / A + p.sink_convection_k_per_w);
  double below = total;
  for (int s = top - 1; s >= 0; --s) {
    below -= inject[s + 1];
    expect[s] = expect[s + 1] + below * rho *
                                    (grid.slab_thickness_m[s] + grid.slab_thickness_m[s + 1]) / 2 /
                                    A;
  }
  for (int s = 0; s < grid.nslabs; ++s)
    CHECK(f.cell_temp_k[grid.cell(0, 0, s)] == Catch::Approx(expect[s]).epsilon(1e-9));
}

TEST_CASE("iterative and direct solves agree on real stacks") {
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  MeshSpec mesh{2, 2, 2, 32, {1.1, 500e6}};
  StackParams p;
  const auto stack = build_stack(tile, mesh, p);
  const auto grid = discretize(stack, 8);
  const auto pm = uniform_power(mesh, 0.01);

  SolveOptions direct;
  direct.method = SolveMethod::Direct;
  SolveOptions iter;
  iter.method = SolveMethod::Iterative;
  const auto fd = solve_steady(grid, pm, direct);
  const auto fi = solve_steady(grid, pm, iter);
  CHECK(fi.solve.converged);
  CHECK_FALSE(fi.solve.direct);
  for (int c = 0; c < grid.ncells(); ++c)
    CHECK(std::abs(fd.cell_temp_k[c] - fi.cell_temp_k[c]) < 1e-6);
}

TEST_CASE("cg matches an independent dense solve on random networks") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> b;
    const auto m = random_network(7, 6, rng, &b);
    const auto x = cg_solve(m, b, 1e-12, 50 * m.rows());
    const auto ref = oracle::dense_solve(m.to_dense(), b);
    for (int i = 0; i < m.rows(); ++i) CHECK(std::abs(x[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("cholesky matches the dense oracle") {
  std::mt19937_64 rng(7);
  std::vector<double> b;
  const auto m = random_network(5, 5, rng, &b);
  const auto x = cholesky_solve(m.to_dense(), b);
  const auto ref = oracle::dense_solve(m.to_dense(), b);
  for (int i = 0; i < m.rows(); ++i) CHECK(std::abs(x[i] - ref[i]) < 1e-9);
}

TEST_CASE("energy conservation and maximum principle") {
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  MeshSpec mesh{3, 3, 2, 32, {1.1, 500e6}};
  StackParams p;
  const auto stack = build_stack(tile, mesh, p);
  const auto grid = discretize(stack, 6);

  PowerMap pm = uniform_power(mesh, 0.0);
  pm.per_router[{1, 1, 0}] = RouterPower{0.002, 0.04};  // one hot router
  const auto f = solve_steady(grid, pm);

  CHECK(ambient_heat_flow_w(f, grid) == Catch::Approx(pm.total_w()).epsilon(1e-6));
  CHECK(f.min_k() >= grid.ambient_k);
  CHECK(f.max_k() > grid.ambient_k);
}

TEST_CASE("bottom layer runs at least as hot as the top layer") {
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  MeshSpec mesh{2, 2, 3, 32, {1.1, 500e6}};
  StackParams p;
  const auto stack = build_stack(tile, mesh, p);
  const auto grid = discretize(stack, 6);
  const auto f = solve_steady(grid, uniform_power(mesh, 0.01));
  const auto temps = region_temps(f, grid);

  double bottom = 0, top = 0;
  int nb = 0, nt = 0;
  for (const auto& rt : temps) {
    if (rt.part != Region::Part::Logic) continue;
    if (rt.router.z == 0) bottom += rt.mean_k, ++nb;
    if (rt.router.z == mesh.nz - 1) top += rt.mean_k, ++nt;
  }
  REQUIRE(nb == 4);
  REQUIRE(nt == 4);
  CHECK(bottom / nb >= top / nt);
}

TEST_CASE("region temperatures cover logic and tsv parts for every router") {
  const auto tile = build_tile(TileStyle::SurroundTsv, 290, 220, 4.06, 220);
  MeshSpec mesh{2, 2, 2, 32, {1.1, 500e6}};
  StackParams p;
  const auto stack = build_stack(tile, mesh, p);
  const auto grid = discretize(stack, 8);
  const auto f = solve_steady(grid, uniform_power(mesh, 0.01));
  const auto temps = region_temps(f, grid);
  CHECK(temps.size() == 2u * mesh.router_count());  // logic + tsv per router
  for (const auto& rt : temps) CHECK(rt.max_k >= rt.mean_k);
  CHECK(std::is_sorted(temps.begin(), temps.end(), [](const RegionTemp& a, const RegionTemp& b) {
    return a.router < b.router || (a.router == b.router && a.part < b.part);
  }));
}

TEST_CASE("transient solve approaches the steady state") {
  const auto p = uniform_params();
  const auto stack = small_stack(1, p);
  const auto grid = discretize(stack, 1);
  PowerMap pm;
  pm.per_router[{0, 0, 0}] = RouterPower{0.0, 0.3};
  const auto steady = solve_steady(grid, pm);

  TemperatureField init;
  init.nx = grid.nx;
  init.ny = grid.ny;
  init.nslabs = grid.nslabs;
  init.ambient_k = grid.ambient_k;
  init.cell_temp_k.assign(grid.ncells(), grid.ambient_k);

  const std::vector<PowerMap> trace(400, pm);
  const auto frames = solve_transient(grid, trace, 1e-3, init);
  REQUIRE(frames.size() == 400);
  // monotone heating from ambient
  CHECK(frames[0].cell_temp_k[0] > grid.ambient_k);
  CHECK(frames[10].cell_temp_k[0] > frames[0].cell_temp_k[0]);
  for (int c = 0; c < grid.ncells(); ++c)
    CHECK(frames.back().cell_temp_k[c] ==
          Catch::Approx(steady.cell_temp_k[c]).margin(1e-3));
}

TEST_CASE("transient input validation") {
  const auto stack = small_stack(1, uniform_params());
  const auto grid = discretize(stack, 1);
  PowerMap pm;
  pm.per_router[{0, 0, 0}] = RouterPower{0.0, 0.1};
  TemperatureField bad;
  bad.cell_temp_k.assign(1, 300.0);
  CHECK_THROWS_AS(solve_transient(grid, {pm}, 1e-3, bad), input_error);
  TemperatureField init;
  init.cell_temp_k.assign(grid.ncells(), 318.15);
  CHECK_THROWS_AS(solve_transient(grid, {pm}, 0.0, init), input_error);
  CHECK_THROWS_AS(solve_transient(grid, {}, 1e-3, init), input_error);
}

TEST_CASE("solver rejects non-SPD input") {
  std::map<std::pair<int, int>, double> e;
  e[{0, 0}] = -1.0;
  e[{1, 1}] = 1.0;
  const CsrMatrix m(2, e);
  CHECK_THROWS_AS(cg_solve(m, {1.0, 1.0}, 1e-10, 100), solver_error);
  CHECK_THROWS_AS(cholesky_solve(m.to_dense(), {1.0, 1.0}), solver_error);
}

TEST_CASE("missing power binding is reported") {
  const auto stack = small_stack(1, uniform_params());
  const auto grid = discretize(stack, 1);
  PowerMap pm;
  pm.per_router[{5, 5, 5}] = RouterPower{0.0, 0.1};
  CHECK_THROWS_AS(solve_steady(grid, pm), input_error);
}

TEST_CASE("temperature csv exports are well formed") {
  const auto stack = small_stack(1, uniform_params());
  const auto grid = discretize(stack, 2);
  PowerMap pm;
  pm.per_router[{0, 0, 0}] = RouterPower{0.0, 0.1};
  const auto f = solve_steady(grid, pm);
  const auto temps = region_temps(f, grid);

  const auto dir = std::filesystem::temp_directory_path();
  write_temperature_csv(dir / "noc3d_tcells.csv", f, grid);
  write_router_summary_csv(dir / "noc3d_tsummary.csv", temps);
  write_region_temps_csv(dir / "noc3d_tregions.csv", temps);

  std::ifstream cells(dir / "noc3d_tcells.csv");
  std::string header;
  std::getline(cells, header);
  CHECK(header == "layer,x,y,z,temp_k");
  int rows = 0;
  for (std::string l; std::getline(cells, l);) ++rows;
  CHECK(rows == grid.ncells());

  const auto back = read_region_temps_csv(dir / "noc3d_tregions.csv");
  REQUIRE(back.size() == temps.size());
  for (std::size_t i = 0; i < temps.size(); ++i) {
    CHECK(back[i].router == temps[i].router);
    CHECK(back[i].part == temps[i].part);
    CHECK(back[i].mean_k == Catch::Approx(temps[i].mean_k).margin(1e-7));
  }
}
