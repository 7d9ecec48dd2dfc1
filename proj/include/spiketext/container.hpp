#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spiketext/types.hpp"

namespace spiketext {

// Little-endian binary buffer used for the versioned artifact containers.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v);
  void bytes(const void* p, size_t n);
  // u32 length prefix + raw bytes
  void str(std::string_view s);

  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

// Bounds-checked reader over a byte buffer; throws std::runtime_error on
// truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : p_(data.data()), end_(data.data() + data.size()) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  int32_t i32() { return static_cast<int32_t>(u32()); }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64();
  void bytes(void* out, size_t n);
  std::string str();

  size_t remaining() const { return static_cast<size_t>(end_ - p_); }

 private:
  void need(size_t n) const;
  const char* p_;
  const char* end_;
};

// Container layout: 4 magic bytes, u32 format version, then named sections
// (u32 name length, name, u64 payload length, payload) until end of file.
// Section order is fixed by each writer so identical inputs produce
// byte-identical files.
inline constexpr uint32_t kContainerVersion = 1;
inline constexpr std::string_view kCorpusMagic = "SETC";
inline constexpr std::string_view kModelMagic = "SETM";

struct Container {
  std::string magic;
  uint32_t version = 0;
  std::vector<std::pair<std::string, std::string>> sections;

  const std::string* find(std::string_view name) const;
  // throws if the section is missing
  const std::string& at(std::string_view name) const;
};

void write_container(const std::filesystem::path& path, std::string_view magic,
                     const std::vector<std::pair<std::string, std::string>>& sections);
Container read_container(const std::filesystem::path& path, std::string_view expected_magic);

// Eigen payload helpers. Dense matrices are stored row-major, sparse ones as
// CSR; both carry explicit dimensions.
void put_dense(ByteWriter& w, const Eigen::MatrixXd& m);
Eigen::MatrixXd get_dense(ByteReader& r);

void put_mask(ByteWriter& w, const MaskMatrix& m);
MaskMatrix get_mask(ByteReader& r);

void put_sparse(ByteWriter& w, const SparseRowMatrix& m);
SparseRowMatrix get_sparse(ByteReader& r);

void put_i32_vector(ByteWriter& w, const std::vector<int32_t>& v);
std::vector<int32_t> get_i32_vector(ByteReader& r);
void put_string_vector(ByteWriter& w, const std::vector<std::string>& v);
std::vector<std::string> get_string_vector(ByteReader& r);

}  // namespace spiketext
