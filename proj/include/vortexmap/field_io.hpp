#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "vortexmap/flowmap.hpp"
#include "vortexmap/grid.hpp"

namespace vxm {

/// Binary dump records: "VXMP", u32 version, u32 dim, u32 dims[dim],
/// f64 dx, f64 origin[dim], u32 kind, then the row-major f64 payload.
/// All values little-endian. A file holds any number of records.
enum class FieldKind : std::uint32_t {
  FaceX = 0,
  FaceY = 1,
  FaceZ = 2,
  VortX = 3,  ///< also the 2D scalar vorticity
  VortY = 4,
  VortZ = 5,
  Cell = 6,
  Map = 7,       ///< d values per vorticity sample, components concatenated
  Jacobian = 8,  ///< d*d values per vorticity sample, row-major
};

const char* to_string(FieldKind k);

struct FieldRecord {
  GridDesc grid;
  FieldKind kind = FieldKind::Cell;
  std::vector<double> data;

  /// Number of doubles the payload of this kind must hold on this grid.
  static std::size_t payload_size(const GridDesc& g, FieldKind k);
};

void write_record(std::ostream& os, const FieldRecord& r);
/// Returns false at a clean end of stream; throws IoError on malformed input.
bool read_record(std::istream& is, FieldRecord& r);

void write_dump(const std::filesystem::path& path, const std::vector<FieldRecord>& records);
std::vector<FieldRecord> read_dump(const std::filesystem::path& path);

std::vector<FieldRecord> to_records(const FaceField& u);
std::vector<FieldRecord> to_records(const VortField& w);
FieldRecord to_record(const CellField& c);
FieldRecord to_record(const MapField& m);
FieldRecord to_record(const JacobianField& j);

FaceField face_field_from(const std::vector<FieldRecord>& records);
VortField vort_field_from(const std::vector<FieldRecord>& records);
CellField cell_field_from(const FieldRecord& r);
MapField map_field_from(const FieldRecord& r);
JacobianField jacobian_field_from(const FieldRecord& r);

struct DumpDifference {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t values = 0;
};

/// Compares two record sequences value by value. Throws IoError if the
/// headers (count, grid, kind) do not match.
DumpDifference compare_records(const std::vector<FieldRecord>& a, const std::vector<FieldRecord>& b);

}  // namespace vxm
