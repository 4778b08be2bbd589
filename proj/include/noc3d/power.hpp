#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "noc3d/core.hpp"
#include "noc3d/traffic.hpp"

namespace noc3d {

// Calibration constants measured once for the router macro by the VLSI flow.
struct RouterPowerProfile {
  double static_power_w = 7.64e-4;
  double energy_per_bit_j = 9.2546e-13;
  OperatingPoint calib{1.1, 500e6};

  void validate() const {
    if (static_power_w <= 0) throw input_error("static power must be > 0");
    if (energy_per_bit_j <= 0) throw input_error("energy per bit must be > 0");
    if (calib.voltage_v <= 0 || calib.frequency_hz <= 0)
      throw input_error("calibration operating point must be positive");
  }
};

struct RouterPower {
  double static_w = 0.0;
  double dynamic_w = 0.0;
  double total_w() const { return static_w + dynamic_w; }
};

struct PowerMap {
  std::map<Coord, RouterPower> per_router;
  OperatingPoint operating_point;
  std::string benchmark_name;

  double total_w() const {
    double t = 0;
    for (const auto& [c, p] : per_router) t += p.total_w();
    return t;
  }
};

inline double energy_per_bit(double total_dynamic_energy_j, std::uint64_t bit_count) {
  if (bit_count == 0) throw input_error("energy_per_bit: bit count must be > 0");
  if (total_dynamic_energy_j < 0) throw input_error("energy_per_bit: energy must be >= 0");
  return total_dynamic_energy_j / static_cast<double>(bit_count);
}

// Static power scales with the voltage ratio only.
inline double scale_static(double p_static_w, const OperatingPoint& from, const OperatingPoint& to) {
  if (from.voltage_v <= 0 || to.voltage_v <= 0)
    throw input_error("scale_static: voltages must be > 0");
  return p_static_w * (to.voltage_v / from.voltage_v);
}

// Dynamic power scales with f * V^2.
inline double scale_dynamic(double p_dyn_w, const OperatingPoint& from, const OperatingPoint& to) {
  if (from.voltage_v <= 0 || to.voltage_v <= 0)
    throw input_error("scale_dynamic: voltages must be > 0");
  if (from.frequency_hz <= 0 || to.frequency_hz <= 0)
    throw input_error("scale_dynamic: frequencies must be > 0");
  return p_dyn_w * (to.frequency_hz * to.voltage_v * to.voltage_v) /
         (from.frequency_hz * from.voltage_v * from.voltage_v);
}

inline RouterPower router_power(const RouterPowerProfile& profile, std::uint64_t bits,
                                double duration_s, const OperatingPoint& target) {
  profile.validate();
  if (duration_s <= 0) throw input_error("router_power: duration must be > 0");
  const double dyn_calib = profile.energy_per_bit_j * static_cast<double>(bits) / duration_s;
  return RouterPower{scale_static(profile.static_power_w, profile.calib, target),
                     scale_dynamic(dyn_calib, profile.calib, target)};
}

inline PowerMap power_map(const TrafficSummary& traffic, const RouterPowerProfile& profile,
                          const MeshSpec& mesh, const OperatingPoint& target) {
  mesh.validate();
  PowerMap out;
  out.operating_point = target;
  out.benchmark_name = traffic.benchmark_name;
  for (int r = 0; r < mesh.router_count(); ++r) {
    const Coord c = detail::index_to_coord(r, mesh);
    std::uint64_t bits = 0;
    if (auto it = traffic.per_router_bits.find(c); it != traffic.per_router_bits.end()) {
      bits = it->second;
    }
    out.per_router[c] = router_power(profile, bits, traffic.duration_s, target);
  }
  return out;
}

// CSV export: metadata line, then "x,y,z,static_w,dynamic_w" rows.
inline void write_power_csv(const std::filesystem::path& file, const PowerMap& pm) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write power csv: " + file.string());
  std::ostringstream os;
  os.precision(17);
  os << "# benchmark=" << pm.benchmark_name << " voltage=" << pm.operating_point.voltage_v
     << " frequency=" << pm.operating_point.frequency_hz << "\n";
  os << "x,y,z,static_w,dynamic_w\n";
  for (const auto& [c, p] : pm.per_router)
    os << c.x << "," << c.y << "," << c.z << "," << p.static_w << "," << p.dynamic_w << "\n";
  out << os.str();
}

inline PowerMap read_power_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw input_error("cannot open power csv: " + file.string());
  PowerMap pm;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      char name[256] = {0};
      double v = 0, f = 0;
      if (std::sscanf(line.c_str(), "# benchmark=%255s voltage=%lf frequency=%lf", name, &v, &f) == 3) {
        pm.benchmark_name = name;
        pm.operating_point = {v, f};
      }
      continue;
    }
    if (line == "x,y,z,static_w,dynamic_w") continue;
    Coord c;
    RouterPower p;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &c.x, &c.y, &c.z, &p.static_w, &p.dynamic_w) != 5)
      throw parse_error("malformed power csv line: '" + line + "'", lineno);
    pm.per_router[c] = p;
  }
  return pm;
}

}  // namespace noc3d
