#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "noc3d/core.hpp"
#include "noc3d/thermal.hpp"

namespace noc3d {

inline constexpr double kBoltzmannEv = 8.617333262e-5;  // eV/K

// Arrhenius fault-rate acceleration: A * J^n * exp(-Ea / (kB T)).
// A and J^n cancel in every normalized ratio.
struct BlackModel {
  double activation_energy_ev = 1.0;
  double prefactor = 1.0;             // A
  double current_density_term = 1.0;  // J^n, combined
};

// Flat below the threshold, Black-form exponential above it.
struct Hrd4Model {
  double threshold_k = 343.15;
  double above_threshold_ea_ev = 1.0;
};

// User-supplied samples (temperature -> normalized rate), interpolated
// piecewise-exponentially; end segments extend their slope.
struct TableModel {
  std::string name;
  std::vector<std::pair<double, double>> points;  // strictly increasing in T and rate
};

using AccelerationModel = std::variant<BlackModel, Hrd4Model, TableModel>;

inline std::string model_name(const AccelerationModel& m) {
  if (std::holds_alternative<BlackModel>(m)) return "black";
  if (std::holds_alternative<Hrd4Model>(m)) return "hrd4";
  return "table:" + std::get<TableModel>(m).name;
}

inline void validate_model(const AccelerationModel& m) {
  if (const auto* b = std::get_if<BlackModel>(&m)) {
    if (b->activation_energy_ev <= 0) throw input_error("activation energy must be > 0");
  } else if (const auto* h = std::get_if<Hrd4Model>(&m)) {
    if (h->threshold_k <= 0) throw input_error("hrd4 threshold must be > 0");
    if (h->above_threshold_ea_ev <= 0) throw input_error("activation energy must be > 0");
  } else {
    const auto& t = std::get<TableModel>(m);
    if (t.points.size() < 2) throw input_error("table model needs at least 2 points");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      if (t.points[i].first <= 0 || t.points[i].second <= 0)
        throw input_error("table model points must be positive");
      if (i > 0 && (t.points[i].first <= t.points[i - 1].first ||
                    t.points[i].second <= t.points[i - 1].second))
        throw input_error("table model points must increase strictly in T and rate");
    }
  }
}

inline double acceleration(const AccelerationModel& m, double t_k) {
  if (t_k <= 0) throw input_error("acceleration: temperature must be > 0");
  validate_model(m);
  if (const auto* b = std::get_if<BlackModel>(&m)) {
    return b->prefactor * b->current_density_term *
           std::exp(-b->activation_energy_ev / (kBoltzmannEv * t_k));
  }
  if (const auto* h = std::get_if<Hrd4Model>(&m)) {
    const double t = std::max(t_k, h->threshold_k);
    return std::exp(-h->above_threshold_ea_ev / (kBoltzmannEv * t));
  }
  const auto& pts = std::get<TableModel>(m).points;
  // log-rate is linear in T on each segment
  std::size_t k = 0;
  while (k + 2 < pts.size() && t_k > pts[k + 1].first) ++k;
  const auto& [t0, r0] = pts[k];
  const auto& [t1, r1] = pts[k + 1];
  const double u = (t_k - t0) / (t1 - t0);
  return std::exp(std::log(r0) + u * (std::log(r1) - std::log(r0)));
}

inline double normalized_rate(const AccelerationModel& m, double t_k, double t_ref_k) {
  return acceleration(m, t_k) / acceleration(m, t_ref_k);
}

// Least-squares Arrhenius fit of Ea over (T, normalized rate) samples:
// ln r = (Ea / kB)(1/t_ref - 1/T), slope through the origin.
inline double fit_activation_energy(std::span<const std::pair<double, double>> pairs,
                                    double t_ref_k) {
  if (pairs.size() < 2) throw input_error("fit_activation_energy: need at least 2 pairs");
  if (t_ref_k <= 0) throw input_error("fit_activation_energy: reference must be > 0");
  double sxx = 0, sxy = 0;
  for (const auto& [t, r] : pairs) {
    if (t <= 0 || r <= 0) throw input_error("fit_activation_energy: nonpositive sample");
    const double x = (1.0 / t_ref_k - 1.0 / t) / kBoltzmannEv;
    sxx += x * x;
    sxy += x * std::log(r);
  }
  if (sxx == 0) throw input_error("fit_activation_energy: degenerate temperatures");
  return sxy / sxx;
}

struct RegionReliability {
  Coord router;
  Region::Part part = Region::Part::Logic;
  std::string material;
  double temp_k = 0;
  double accel = 0;
  double norm_rate = 0;
  double norm_mttf = 0;
};

struct ReliabilityMap {
  std::vector<RegionReliability> regions;
  double reference_k = 0;
  std::string copper_model, logic_model;

  struct LayerStats {
    int layer = 0;
    double mean_rate = 0, worst_rate = 0, best_mttf = 0, worst_mttf = 0;
  };
  std::vector<LayerStats> per_layer;
};

// Copper TSV regions age under the copper model, router logic under the CMOS
// model; mttf is the exact reciprocal of the normalized rate.
inline ReliabilityMap mttf_map(const std::vector<RegionTemp>& temps,
                               const AccelerationModel& copper_model,
                               const AccelerationModel& logic_model, double t_ref_k) {
  if (temps.empty()) throw input_error("mttf_map: no region temperatures");
  validate_model(copper_model);
  validate_model(logic_model);

  ReliabilityMap out;
  out.reference_k = t_ref_k;
  out.copper_model = model_name(copper_model);
  out.logic_model = model_name(logic_model);

  std::map<int, std::vector<double>> layer_rates;
  for (const auto& rt : temps) {
    const bool is_copper = rt.part == Region::Part::SignalTsv;
    const AccelerationModel& m = is_copper ? copper_model : logic_model;
    RegionReliability r;
    r.router = rt.router;
    r.part = rt.part;
    r.material = is_copper ? "copper" : "logic";
    r.temp_k = rt.mean_k;
    r.accel = acceleration(m, rt.mean_k);
    r.norm_rate = normalized_rate(m, rt.mean_k, t_ref_k);
    r.norm_mttf = 1.0 / r.norm_rate;
    layer_rates[rt.router.z].push_back(r.norm_rate);
    out.regions.push_back(std::move(r));
  }
  for (const auto& [layer, rates] : layer_rates) {
    ReliabilityMap::LayerStats st;
    st.layer = layer;
    double sum = 0;
    st.worst_rate = rates.front();
    for (double r : rates) {
      sum += r;
      st.worst_rate = std::max(st.worst_rate, r);
    }
    st.mean_rate = sum / static_cast<double>(rates.size());
    st.worst_mttf = 1.0 / st.worst_rate;
    st.best_mttf = 1.0 / *std::min_element(rates.begin(), rates.end());
    out.per_layer.push_back(st);
  }
  return out;
}

// Regions at or above the rate threshold, hottest first, ties in coordinate order.
inline std::vector<RegionReliability> defect_map(const ReliabilityMap& rel,
                                                double rate_threshold) {
  if (rate_threshold <= 0) throw input_error("defect_map: threshold must be > 0");
  std::vector<RegionReliability> out;
  for (const auto& r : rel.regions)
    if (r.norm_rate >= rate_threshold) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const RegionReliability& a, const RegionReliability& b) {
    if (a.norm_rate != b.norm_rate) return a.norm_rate > b.norm_rate;
    if (a.router != b.router) return a.router < b.router;
    return static_cast<int>(a.part) < static_cast<int>(b.part);
  });
  return out;
}

inline void write_reliability_csv(const std::filesystem::path& file, const ReliabilityMap& rel) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write reliability csv: " + file.string());
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "# reference_k=%.9g copper_model=%s logic_model=%s\n",
                rel.reference_k, rel.copper_model.c_str(), rel.logic_model.c_str());
  os << buf << "x,y,z,layer,material,temp_k,norm_rate,norm_mttf\n";
  for (const auto& r : rel.regions) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%s,%.9f,%.9g,%.9g\n", r.router.x, r.router.y,
                  r.router.z, r.router.z, r.material.c_str(), r.temp_k, r.norm_rate, r.norm_mttf);
    os << buf;
  }
  out << os.str();
}

inline void write_defect_csv(const std::filesystem::path& file,
                             const std::vector<RegionReliability>& defects) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write defect csv: " + file.string());
  std::ostringstream os;
  char buf[200];
  os << "x,y,z,layer,material,temp_k,norm_rate,norm_mttf\n";
  for (const auto& r : defects) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%s,%.9f,%.9g,%.9g\n", r.router.x, r.router.y,
                  r.router.z, r.router.z, r.material.c_str(), r.temp_k, r.norm_rate, r.norm_mttf);
    os << buf;
  }
  out << os.str();
}

}  // namespace noc3d
