#include "vortexmap/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace vxm {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'X', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("field dump: truncated record header");
  return v;
}

std::size_t sample_count(const GridDesc& g) {
  std::size_t n = 0;
  for (int c : vort_components(g.dim)) {
    const Index3 s = edge_layout(g, c).shape;
    n += static_cast<std::size_t>(s[0]) * s[1] * s[2];
  }
  return n;
}

std::size_t shape_size(const Index3& s) { return static_cast<std::size_t>(s[0]) * s[1] * s[2]; }

int vort_kind_component(const GridDesc& g, FieldKind k) {
  const int c = static_cast<int>(k) - static_cast<int>(FieldKind::VortX);
  return g.dim == 2 ? 2 : c;
}

}  // namespace

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::FaceX: return "face-x";
    case FieldKind::FaceY: return "face-y";
    case FieldKind::FaceZ: return "face-z";
    case FieldKind::VortX: return "vort-x";
    case FieldKind::VortY: return "vort-y";
    case FieldKind::VortZ: return "vort-z";
    case FieldKind::Cell: return "cell";
    case FieldKind::Map: return "map";
    case FieldKind::Jacobian: return "jacobian";
  }
  return "unknown";
}

std::size_t FieldRecord::payload_size(const GridDesc& g, FieldKind k) {
  const auto kv = static_cast<std::uint32_t>(k);
  if (kv <= 2) {
    if (static_cast<int>(kv) >= g.dim) throw IoError("field dump: face component beyond grid dimension");
    return shape_size(face_layout(g, static_cast<int>(kv)).shape);
  }
  if (kv <= 5) {
    if (g.dim == 2 && k != FieldKind::VortX) throw IoError("field dump: 2D grids carry only the scalar vorticity");
    return shape_size(edge_layout(g, vort_kind_component(g, k)).shape);
  }
  if (k == FieldKind::Cell) return g.cell_count();
  if (k == FieldKind::Map) return sample_count(g) * g.dim;
  if (k == FieldKind::Jacobian) return sample_count(g) * g.dim * g.dim;
  throw IoError("field dump: unknown field kind " + std::to_string(kv));
}

void write_record(std::ostream& os, const FieldRecord& r) {
  const GridDesc& g = r.grid;
  if (r.data.size() != FieldRecord::payload_size(g, r.kind))
    throw IoError(std::string("field dump: payload size does not match ") + to_string(r.kind) + " layout");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims[a]));
  put<double>(os, g.dx);
  for (int a = 0; a < g.dim; ++a) put<double>(os, g.origin[a]);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(r.kind));
  os.write(reinterpret_cast<const char*>(r.data.data()), static_cast<std::streamsize>(r.data.size() * sizeof(double)));
  if (!os) throw IoError("field dump: write failed");
}

bool read_record(std::istream& is, FieldRecord& r) {
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() == 0 && is.eof()) return false;
  if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw IoError("field dump: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw IoError("field dump: unsupported version");
  const auto dim = get<std::uint32_t>(is);
  if (dim != 2 && dim != 3) throw IoError("field dump: dimension must be 2 or 3");
  GridDesc g;
  g.dim = static_cast<int>(dim);
  g.dims = {1, 1, 1};
  for (int a = 0; a < g.dim; ++a) g.dims[a] = static_cast<int>(get<std::uint32_t>(is));
  g.dx = get<double>(is);
  g.origin = {};
  for (int a = 0; a < g.dim; ++a) g.origin[a] = get<double>(is);
  try {
    g.validate();
  } catch (const ContractError& e) {
    throw IoError(std::string("field dump: invalid grid: ") + e.what());
  }
  r.grid = g;
  r.kind = static_cast<FieldKind>(get<std::uint32_t>(is));
  r.data.resize(FieldRecord::payload_size(g, r.kind));
  is.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(r.data.size() * sizeof(double)));
  if (!is) throw IoError("field dump: truncated payload");
  return true;
}

void write_dump(const std::filesystem::path& path, const std::vector<FieldRecord>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) write_record(os, r);
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<FieldRecord> read_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<FieldRecord> out;
  FieldRecord r;
  while (read_record(is, r)) out.push_back(r);
  return out;
}

std::vector<FieldRecord> to_records(const FaceField& u) {
  std::vector<FieldRecord> out;
  for (int a : u.components()) out.push_back({u.grid, static_cast<FieldKind>(a), u[a].raw()});
  return out;
}

std::vector<FieldRecord> to_records(const VortField& w) {
  std::vector<FieldRecord> out;
  if (w.grid.dim == 2) {
    out.push_back({w.grid, FieldKind::VortX, w.scalar().raw()});
    return out;
  }
  for (int c : w.components()) out.push_back({w.grid, static_cast<FieldKind>(3 + c), w[c].raw()});
  return out;
}

FieldRecord to_record(const CellField& c) { return {c.grid, FieldKind::Cell, c.values.raw()}; }

FieldRecord to_record(const MapField& m) {
  require(m.stagger == Stagger::Edge, "to_record: only vorticity-sampled maps are dumped");
  FieldRecord r{m.grid, FieldKind::Map, {}};
  r.data.reserve(FieldRecord::payload_size(m.grid, FieldKind::Map));
  for (int c : m.components())
    for (const Vec3& p : m.block[c])
      for (int a = 0; a < m.grid.dim; ++a) r.data.push_back(p[a]);
  return r;
}

FieldRecord to_record(const JacobianField& j) {
  require(j.stagger == Stagger::Edge, "to_record: only vorticity-sampled Jacobians are dumped");
  const int d = j.grid.dim;
  FieldRecord r{j.grid, FieldKind::Jacobian, {}};
  r.data.reserve(FieldRecord::payload_size(j.grid, FieldKind::Jacobian));
  for (int c : j.components())
    for (const Mat3& m : j.block[c])
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) r.data.push_back(m(p, q));
  return r;
}

FaceField face_field_from(const std::vector<FieldRecord>& records) {
  if (records.empty()) throw IoError("no face records");
  FaceField u(records.front().grid);
  std::array<bool, 3> seen{};
  for (const auto& r : records) {
    const auto k = static_cast<int>(r.kind);
    if (k > 2 || !(r.grid == u.grid)) continue;
    u[k].raw() = r.data;
    seen[k] = true;
  }
  for (int a : u.components())
    if (!seen[a]) throw IoError("missing face component " + std::to_string(a));
  return u;
}

VortField vort_field_from(const std::vector<FieldRecord>& records) {
  if (records.empty()) throw IoError("no vorticity records");
  const GridDesc g = records.front().grid;
  VortField w(g);
  std::array<bool, 3> seen{};
  for (const auto& r : records) {
    const auto k = static_cast<int>(r.kind);
    if (k < 3 || k > 5 || !(r.grid == g)) continue;
    const int c = vort_kind_component(g, r.kind);
    w[c].raw() = r.data;
    seen[c] = true;
  }
  for (int c : w.components())
    if (!seen[c]) throw IoError("missing vorticity component " + std::to_string(c));
  return w;
}

CellField cell_field_from(const FieldRecord& r) {
  if (r.kind != FieldKind::Cell) throw IoError("record is not a cell field");
  CellField c(r.grid);
  c.values.raw() = r.data;
  return c;
}

MapField map_field_from(const FieldRecord& r) {
  if (r.kind != FieldKind::Map) throw IoError("record is not a map field");
  MapField m = sample_positions(r.grid);
  const int d = r.grid.dim;
  std::size_t k = 0;
  for (int c : m.components())
    for (Vec3& p : m.block[c]) {
      p = {};
      for (int a = 0; a < d; ++a) p[a] = r.data[k++];
    }
  return m;
}

JacobianField jacobian_field_from(const FieldRecord& r) {
  if (r.kind != FieldKind::Jacobian) throw IoError("record is not a Jacobian field");
  JacobianField j = identity_jacobians(r.grid);
  const int d = r.grid.dim;
  std::size_t k = 0;
  for (int c : j.components())
    for (Mat3& m : j.block[c])
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) m(p, q) = r.data[k++];
  return j;
}

DumpDifference compare_records(const std::vector<FieldRecord>& a, const std::vector<FieldRecord>& b) {
  if (a.size() != b.size()) throw IoError("dumps hold different numbers of records");
  DumpDifference d;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].grid == b[i].grid) || a[i].kind != b[i].kind)
      throw IoError("record " + std::to_string(i) + ": header mismatch");
    for (std::size_t n = 0; n < a[i].data.size(); ++n) {
      const double e = std::abs(a[i].data[n] - b[i].data[n]);
      d.max_abs = std::max(d.max_abs, std::isnan(e) ? INFINITY : e);
      sum += e;
    }
    d.values += a[i].data.size();
  }
  d.mean_abs = d.values ? sum / static_cast<double>(d.values) : 0.0;
  return d;
}

}  // namespace vxm
