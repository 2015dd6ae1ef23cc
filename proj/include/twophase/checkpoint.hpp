#pragma once

// Binary checkpoint primitives. Everything is little-endian: 32/64-bit
// integers and IEEE-754 binary64 reals, written bit-for-bit.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twophase/net.hpp"

namespace twophase {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'T', 'W', 'O', 'P', 'H', 'A', 'S', 'E'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}
  void u32(std::uint32_t v);
  void i64(std::int64_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void bytes(const char* data, std::size_t n);

 private:
  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}
  std::uint32_t u32();
  std::int64_t i64();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t n);
  void bytes(char* data, std::size_t n);

 private:
  std::istream& is_;
};

/// Header: magic, version, record kind.
void write_header(BinaryWriter& w, std::uint32_t kind);
/// Validates magic and version and returns the record kind.
std::uint32_t read_header(BinaryReader& r);

/// Layer shapes, step counter, then parameters, first and second moments.
void write_paramset(BinaryWriter& w, const ParamSet& ps);
ParamSet read_paramset(BinaryReader& r);

inline constexpr std::uint32_t kKindParamSet = 1;
inline constexpr std::uint32_t kKindTrainer = 2;

void save_paramset(const std::string& path, const ParamSet& ps);
ParamSet load_paramset(const std::string& path);

}  // namespace twophase
