#pragma once

#include "bgk/grids.hpp"
#include "bgk/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace bgk {

/// Snapshot byte layout (all integers and floats little-endian):
///
///   8 bytes  magic "BGKSNAP1"
///   u32      d
///   u32 x d  cells per axis
///   u32      velocity points per axis
///   f64      gamma
///   f64      time
///   f64 x d  torus period per axis
///   f64      velocity box half width
///   u64      step count
///   f64 x (cells * velocity nodes)  values, spatial index outer, velocity index inner
struct Snapshot {
  SpatialGrid<double> space;
  int velocity_points = 0;
  double half_width = 0;
  double gamma = 0;
  double t = 0;
  std::uint64_t steps = 0;
  FieldArray<double> values;

  SolverState<double> state() const;
};

void write_snapshot(const std::filesystem::path& path, const SolverState<double>& s, double gamma);
Snapshot read_snapshot(const std::filesystem::path& path);

/// RFC-4180 writer: comma separated, CRLF line ends, '.' decimal point, no locale.
/// Numbers use the shortest representation that round-trips.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void flush() { out_.flush(); }

  static std::string format(double v);
  static std::string quote(std::string_view field);

 private:
  void require_width(std::size_t n);

  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t width_ = 0;
};

/// Reads a CSV written by CsvWriter: header names and numeric rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace bgk
