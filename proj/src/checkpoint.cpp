#include "twophase/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace twophase {

namespace {

template <class U>
void put_le(std::ostream& os, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, sizeof(U));
  if (!os) throw CheckpointError("checkpoint write failed");
}

template <class U>
U get_le(std::istream& is) {
  unsigned char buf[sizeof(U)];
  is.read(reinterpret_cast<char*>(buf), sizeof(U));
  if (!is) throw CheckpointError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void BinaryWriter::u32(std::uint32_t v) { put_le(os_, v); }
void BinaryWriter::i64(std::int64_t v) { put_le(os_, static_cast<std::uint64_t>(v)); }
void BinaryWriter::u64(std::uint64_t v) { put_le(os_, v); }
void BinaryWriter::f64(double v) { put_le(os_, std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::f64s(std::span<const double> v) {
  for (double x : v) f64(x);
}
void BinaryWriter::bytes(const char* data, std::size_t n) {
  os_.write(data, static_cast<std::streamsize>(n));
  if (!os_) throw CheckpointError("checkpoint write failed");
}

std::uint32_t BinaryReader::u32() { return get_le<std::uint32_t>(is_); }
std::int64_t BinaryReader::i64() { return static_cast<std::int64_t>(get_le<std::uint64_t>(is_)); }
std::uint64_t BinaryReader::u64() { return get_le<std::uint64_t>(is_); }
double BinaryReader::f64() { return std::bit_cast<double>(get_le<std::uint64_t>(is_)); }
std::vector<double> BinaryReader::f64s(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}
void BinaryReader::bytes(char* data, std::size_t n) {
  is_.read(data, static_cast<std::streamsize>(n));
  if (!is_) throw CheckpointError("checkpoint truncated");
}

void write_header(BinaryWriter& w, std::uint32_t kind) {
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(kind);
}

std::uint32_t read_header(BinaryReader& r) {
  char magic[sizeof kCheckpointMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw CheckpointError("not a checkpoint file");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  return r.u32();
}

void write_paramset(BinaryWriter& w, const ParamSet& ps) {
  const auto& sizes = ps.net.sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) w.u32(static_cast<std::uint32_t>(s));
  w.i64(ps.step);
  w.u64(ps.net.num_params());
  w.f64s(ps.net.params());
  w.f64s(ps.m);
  w.f64s(ps.v);
}

ParamSet read_paramset(BinaryReader& r) {
  const auto layers = r.u32();
  if (layers < 2 || layers > 64) throw CheckpointError("implausible layer count in checkpoint");
  std::vector<int> sizes(layers);
  for (auto& s : sizes) s = static_cast<int>(r.u32());
  ParamSet ps{Mlp(sizes)};
  ps.step = r.i64();
  const auto n = r.u64();
  if (n != ps.net.num_params()) throw CheckpointError("parameter count does not match layer shapes");
  auto theta = r.f64s(n);
  std::copy(theta.begin(), theta.end(), ps.net.params().begin());
  ps.m = r.f64s(n);
  ps.v = r.f64s(n);
  return ps;
}

void save_paramset(const std::string& path, const ParamSet& ps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path + " for writing");
  BinaryWriter w(os);
  write_header(w, kKindParamSet);
  write_paramset(w, ps);
}

ParamSet load_paramset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path);
  BinaryReader r(is);
  if (read_header(r) != kKindParamSet) throw CheckpointError(path + " is not a parameter-set checkpoint");
  return read_paramset(r);
}

}  // namespace twophase
