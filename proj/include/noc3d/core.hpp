#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace noc3d {

// Bad user-supplied values (coordinates out of range, nonpositive voltages, ...).
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external files; carries the offending line number when known.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Numerical failures that valid inputs should never trigger.
class solver_error : public std::runtime_error {
public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;
  auto operator<=>(const Coord&) const = default;
};

inline std::string to_string(const Coord& c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
}

struct OperatingPoint {
  double voltage_v = 0.0;
  double frequency_hz = 0.0;
  auto operator<=>(const OperatingPoint&) const = default;
};

struct MeshSpec {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  int flit_width_bits = 32;
  OperatingPoint operating_point;

  int router_count() const { return nx * ny * nz; }

  bool contains(const Coord& c) const {
    return c.x >= 0 && c.x < nx && c.y >= 0 && c.y < ny && c.z >= 0 && c.z < nz;
  }

  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1)
      throw input_error("mesh dims must be >= 1");
    if (flit_width_bits < 1)
      throw input_error("flit width must be >= 1 bit");
    if (operating_point.voltage_v <= 0.0)
      throw input_error("mesh voltage must be > 0");
    if (operating_point.frequency_hz <= 0.0)
      throw input_error("mesh frequency must be > 0");
  }
};

}  // namespace noc3d
