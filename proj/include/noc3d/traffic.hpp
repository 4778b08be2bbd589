#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "noc3d/core.hpp"

namespace noc3d {

enum class PatternKind { Uniform, Transpose, Matrix, Hotspot };

inline const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Uniform: return "uniform";
    case PatternKind::Transpose: return "transpose";
    case PatternKind::Matrix: return "matrix";
    case PatternKind::Hotspot: return "hotspot";
  }
  return "?";
}

struct SyntheticPattern {
  PatternKind kind = PatternKind::Uniform;
  std::vector<Coord> hotspot_nodes;       // Hotspot only
  double hotspot_fraction = 0.0;          // fraction of total packets per hotspot node
  int packets_per_source = 2;
  int flits_per_packet = 10;
  std::uint64_t seed = 0;

  void validate(const MeshSpec& mesh) const {
    if (packets_per_source < 1) throw input_error("packets_per_source must be >= 1");
    if (flits_per_packet < 1) throw input_error("flits_per_packet must be >= 1");
    if (kind == PatternKind::Hotspot) {
      if (hotspot_nodes.empty())
        throw input_error("hotspot pattern requires at least one hotspot node");
      if (hotspot_fraction <= 0.0 || hotspot_fraction >= 1.0)
        throw input_error("hotspot_fraction must lie in (0,1)");
      if (hotspot_fraction * static_cast<double>(hotspot_nodes.size()) >= 1.0)
        throw input_error("hotspot_fraction x node count must be < 1");
      for (const auto& n : hotspot_nodes)
        if (!mesh.contains(n))
          throw input_error("hotspot node " + to_string(n) + " outside mesh");
    }
  }
};

// Per-router transported bit counts plus wall-clock duration of one benchmark run.
struct TrafficSummary {
  std::string benchmark_name;
  std::map<Coord, std::uint64_t> per_router_bits;
  double duration_s = 0.0;
  OperatingPoint source_operating_point;

  std::uint64_t total_bits() const {
    std::uint64_t t = 0;
    for (const auto& [c, b] : per_router_bits) t += b;
    return t;
  }
};

// Deterministic dimension-order path: resolve X, then Y, then Z, one hop at a time.
inline std::vector<Coord> route_xyz(const Coord& src, const Coord& dst, const MeshSpec& mesh) {
  if (!mesh.contains(src)) throw input_error("route source " + to_string(src) + " outside mesh");
  if (!mesh.contains(dst)) throw input_error("route destination " + to_string(dst) + " outside mesh");
  std::vector<Coord> path;
  Coord cur = src;
  path.push_back(cur);
  auto walk = [&](int Coord::* axis) {
    while (cur.*axis != dst.*axis) {
      cur.*axis += (dst.*axis > cur.*axis) ? 1 : -1;
      path.push_back(cur);
    }
  };
  walk(&Coord::x);
  walk(&Coord::y);
  walk(&Coord::z);
  return path;
}

namespace detail {

inline Coord transpose_dest(const Coord& s, const MeshSpec& m) {
  return Coord{m.nz - 1 - s.z, m.ny - 1 - s.y, m.nx - 1 - s.x};
}

inline Coord matrix_dest(const Coord& s, const MeshSpec&) {
  return Coord{s.y, s.x, s.z};
}

inline Coord index_to_coord(int idx, const MeshSpec& m) {
  return Coord{idx % m.nx, (idx / m.nx) % m.ny, idx / (m.nx * m.ny)};
}

}  // namespace detail

// Destination of every generated packet, in source-major enumeration order
// (router index outer, packet index inner). Exposed so traffic accounting can
// be cross-checked by independent path enumeration.
inline std::vector<Coord> synthetic_destinations(const SyntheticPattern& pattern,
                                                 const MeshSpec& mesh) {
  mesh.validate();
  pattern.validate(mesh);

  const int nrouters = mesh.router_count();
  const std::uint64_t npackets =
      static_cast<std::uint64_t>(nrouters) * static_cast<std::uint64_t>(pattern.packets_per_source);

  // One destination per (source, packet) pair in a fixed enumeration order.
  std::vector<Coord> dest(npackets);
  std::mt19937_64 rng(pattern.seed);
  std::uniform_int_distribution<int> pick(0, nrouters - 1);

  std::size_t g = 0;
  for (int r = 0; r < nrouters; ++r) {
    const Coord src = detail::index_to_coord(r, mesh);
    for (int p = 0; p < pattern.packets_per_source; ++p, ++g) {
      switch (pattern.kind) {
        case PatternKind::Uniform:
        case PatternKind::Hotspot:
          dest[g] = detail::index_to_coord(pick(rng), mesh);
          break;
        case PatternKind::Transpose: {
          const Coord d = detail::transpose_dest(src, mesh);
          if (!mesh.contains(d))
            throw input_error("transpose destination " + to_string(d) + " outside mesh");
          dest[g] = d;
          break;
        }
        case PatternKind::Matrix: {
          const Coord d = detail::matrix_dest(src, mesh);
          if (!mesh.contains(d))
            throw input_error("matrix destination " + to_string(d) + " outside mesh");
          dest[g] = d;
          break;
        }
      }
    }
  }

  // Hotspot: each hot node is the destination of exactly round(fraction x total)
  // packets, spread evenly over the enumeration order; the rest stay uniform.
  if (pattern.kind == PatternKind::Hotspot) {
    const auto quota = static_cast<std::uint64_t>(
        std::llround(pattern.hotspot_fraction * static_cast<double>(npackets)));
    const std::uint64_t nhot = quota * pattern.hotspot_nodes.size();
    for (std::uint64_t i = 0; i < nhot; ++i) {
      const auto pos = static_cast<std::size_t>(i * npackets / nhot);
      dest[pos] = pattern.hotspot_nodes[i % pattern.hotspot_nodes.size()];
    }
  }
  return dest;
}

// Generates packets from every source at the ideal injection rate and attributes
// the packet's bits to every router its XYZ path traverses.
inline TrafficSummary gen_synthetic(const SyntheticPattern& pattern, const MeshSpec& mesh,
                                    const std::string& name = "") {
  const std::vector<Coord> dest = synthetic_destinations(pattern, mesh);
  const int nrouters = mesh.router_count();

  TrafficSummary out;
  out.benchmark_name = name.empty() ? to_string(pattern.kind) : name;
  out.source_operating_point = mesh.operating_point;

  const std::uint64_t packet_bits =
      static_cast<std::uint64_t>(pattern.flits_per_packet) * mesh.flit_width_bits;
  std::size_t g = 0;
  for (int r = 0; r < nrouters; ++r) {
    const Coord src = detail::index_to_coord(r, mesh);
    for (int p = 0; p < pattern.packets_per_source; ++p, ++g)
      for (const Coord& hop : route_xyz(src, dest[g], mesh))
        out.per_router_bits[hop] += packet_bits;
  }
  for (int r = 0; r < nrouters; ++r)
    out.per_router_bits.try_emplace(detail::index_to_coord(r, mesh), 0);

  // Congestion-free duration: every source drains one flit per cycle.
  const double cycles =
      static_cast<double>(pattern.packets_per_source) * pattern.flits_per_packet;
  out.duration_s = cycles / mesh.operating_point.frequency_hz;
  return out;
}

// Trace file: UTF-8 CSV. One "# duration_s=<f> voltage=<f> frequency=<f>"
// metadata line, a "x,y,z,bits" header, then "x,y,z,count" body lines.
// Duplicate coordinates sum; routers absent from the file get 0 bits.
inline TrafficSummary ingest_trace(const std::filesystem::path& file, const MeshSpec& mesh) {
  mesh.validate();
  std::ifstream in(file);
  if (!in) throw input_error("cannot open trace file: " + file.string());

  TrafficSummary out;
  out.benchmark_name = file.stem().string();
  bool have_meta = false;

  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      double d = 0, v = 0, f = 0;
      if (std::sscanf(line.c_str(), "# duration_s=%lf voltage=%lf frequency=%lf", &d, &v, &f) != 3)
        throw parse_error("malformed trace metadata line", lineno);
      if (d <= 0) throw input_error("trace duration must be > 0");
      out.duration_s = d;
      out.source_operating_point = {v, f};
      have_meta = true;
      continue;
    }
    if (line == "x,y,z,bits") continue;  // column header
    Coord c;
    long long count = 0;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lld%c", &c.x, &c.y, &c.z, &count, &extra) != 4)
      throw parse_error("malformed trace line: '" + line + "'", lineno);
    if (!mesh.contains(c))
      throw input_error("trace coordinate " + to_string(c) + " outside mesh (line " +
                        std::to_string(lineno) + ")");
    if (count < 0) throw input_error("negative bit count (line " + std::to_string(lineno) + ")");
    out.per_router_bits[c] += static_cast<std::uint64_t>(count);
  }
  if (!have_meta) throw parse_error("trace file missing '# duration_s=...' metadata line");

  for (int r = 0; r < mesh.router_count(); ++r)
    out.per_router_bits.try_emplace(detail::index_to_coord(r, mesh), 0);
  return out;
}

inline void write_trace(const std::filesystem::path& file, const TrafficSummary& t) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write trace file: " + file.string());
  std::ostringstream os;
  os.precision(17);
  os << "# duration_s=" << t.duration_s << " voltage=" << t.source_operating_point.voltage_v
     << " frequency=" << t.source_operating_point.frequency_hz << "\n";
  os << "x,y,z,bits\n";
  for (const auto& [c, bits] : t.per_router_bits)
    os << c.x << "," << c.y << "," << c.z << "," << bits << "\n";
  out << os.str();
}

}  // namespace noc3d
