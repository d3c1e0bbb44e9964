#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "vortexmap/field_io.hpp"

using namespace vxm;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("vxm_test_") + name);
}

}  // namespace

TEST_CASE("every field kind round-trips bitwise") {
  std::mt19937_64 rng(3);
  for (const GridDesc& g : {GridDesc::make2d(7, 5, 0.1, {0.25, -1, 0}), GridDesc::make3d(4, 5, 6, 0.3)}) {
    const FaceField u = oracle::random_faces(g, rng);
    VortField w = oracle::random_vorticity(g, rng);
    w.scalar().raw().front() = -0.0;
    CellField c(g);
    for (double& v : c.values.raw()) v = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), -1070);
    MapField m = sample_positions(g);
    JacobianField j = identity_jacobians(g);
    for (int comp : j.components()) j.block[comp].front()(0, 1) = 1.0 / 3.0;

    std::vector<FieldRecord> recs = to_records(u);
    for (auto& r : to_records(w)) recs.push_back(r);
    recs.push_back(to_record(c));
    recs.push_back(to_record(m));
    recs.push_back(to_record(j));

    const auto path = temp_file("roundtrip.bin");
    write_dump(path, recs);
    const auto back = read_dump(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t n = 0; n < recs.size(); ++n) {
      CHECK(back[n].kind == recs[n].kind);
      CHECK(back[n].grid == recs[n].grid);
      CHECK(bitwise_equal(back[n].data, recs[n].data));
    }
    CHECK(face_field_from(back) == u);
    const VortField w2 = vort_field_from(back);
    CHECK(bitwise_equal(w2.scalar().raw(), w.scalar().raw()));
    const std::size_t nf = u.components().size(), nw = w.components().size();
    CHECK(bitwise_equal(cell_field_from(back[nf + nw]).values.raw(), c.values.raw()));
    CHECK(map_field_from(back[nf + nw + 1]) == m);
    CHECK(jacobian_field_from(back[nf + nw + 2]) == j);
  }
}

TEST_CASE("record header layout") {
  const GridDesc g = GridDesc::make2d(4, 5, 0.5);
  CellField c(g);
  c.values(1, 2, 0) = 1.0;
  std::ostringstream os;
  write_record(os, to_record(c));
  const std::string s = os.str();
  // magic, version, dim, dims[2], dx, origin[2], kind, payload
  CHECK(s.size() == 4 + 4 + 4 + 8 + 8 + 16 + 4 + 20 * 8);
  CHECK(s.substr(0, 4) == "VXMP");
  std::uint32_t dim = 0;
  std::memcpy(&dim, s.data() + 8, 4);
  CHECK(dim == 2);
  double dx = 0;
  std::memcpy(&dx, s.data() + 20, 8);
  CHECK(dx == 0.5);
}

TEST_CASE("corrupt and mismatched dumps are rejected") {
  const GridDesc g = GridDesc::make2d(4, 4, 0.25);
  std::ostringstream os;
  write_record(os, to_record(CellField(g)));
  std::string good = os.str();

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream is1(bad_magic);
  FieldRecord r;
  CHECK_THROWS_AS(read_record(is1, r), IoError);

  std::istringstream is2(good.substr(0, good.size() - 3));
  CHECK_THROWS_AS(read_record(is2, r), IoError);

  std::istringstream is3("");
  CHECK_FALSE(read_record(is3, r));

  CHECK_THROWS_AS(read_dump(temp_file("does_not_exist.bin")), IoError);

  FieldRecord wrong = to_record(CellField(g));
  wrong.data.pop_back();
  std::ostringstream os2;
  CHECK_THROWS_AS(write_record(os2, wrong), IoError);
}

TEST_CASE("compare_records reports differences and header mismatch") {
  const GridDesc g = GridDesc::make2d(4, 4, 0.25);
  CellField a(g), b(g);
  b.values(1, 1, 0) = 0.5;
  b.values(2, 3, 0) = -2.0;
  const DumpDifference d = compare_records({to_record(a)}, {to_record(b)});
  CHECK(d.max_abs == 2.0);
  CHECK(d.values == 16);
  CHECK(d.mean_abs == doctest::Approx(2.5 / 16));
  CHECK(compare_records({to_record(a)}, {to_record(a)}).max_abs == 0.0);

  CHECK_THROWS_AS(compare_records({to_record(a)}, {to_record(CellField(GridDesc::make2d(4, 5, 0.25)))}), IoError);
  CHECK_THROWS_AS(compare_records({to_record(a)}, {}), IoError);
}
