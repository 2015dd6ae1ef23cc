#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "twophase/checkpoint.hpp"

using namespace twophase;

TEST_SUITE("checkpoint") {

TEST_CASE("primitives are little-endian and bit exact") {
  std::stringstream ss;
  BinaryWriter w(ss);
  w.u32(0x01020304u);
  w.i64(-2);
  w.f64(-0.0);
  w.f64(std::numeric_limits<double>::denorm_min());
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4 + 8 + 8 + 8);
  CHECK(bytes[0] == 0x04);
  CHECK(bytes[3] == 0x01);
  BinaryReader r(ss);
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.i64() == -2);
  const double nz = r.f64();
  CHECK(nz == 0.0);
  CHECK(std::signbit(nz));
  CHECK(r.f64() == std::numeric_limits<double>::denorm_min());
  CHECK_THROWS_AS(r.u32(), CheckpointError);
}

TEST_CASE("paramset round trip") {
  ParamSet ps(init_mlp(4, {3, 5, 3}));
  adam_step(ps, std::vector<double>(ps.net.num_params(), 0.25), 1e-2);
  const auto path = (std::filesystem::temp_directory_path() / "twophase_ps_test.bin").string();
  save_paramset(path, ps);
  CHECK(load_paramset(path) == ps);
  std::filesystem::remove(path);
}

TEST_CASE("header validation") {
  std::stringstream ss;
  ss << "NOTMAGIC";
  BinaryReader r(ss);
  CHECK_THROWS_AS(read_header(r), CheckpointError);

  std::stringstream ok;
  BinaryWriter w(ok);
  write_header(w, kKindTrainer);
  BinaryReader r2(ok);
  CHECK(read_header(r2) == kKindTrainer);
}

TEST_CASE("truncated file is rejected") {
  ParamSet ps(init_mlp(1, {3, 4, 3}));
  const auto path = (std::filesystem::temp_directory_path() / "twophase_trunc.bin").string();
  save_paramset(path, ps);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
  CHECK_THROWS_AS(load_paramset(path), CheckpointError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_paramset(path), CheckpointError);
}

}
