#include "spiketext/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spiketext {

void ByteWriter::u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::u64(uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::bytes(const void* p, size_t n) {
  buf_.append(static_cast<const char*>(p), n);
}

void ByteWriter::str(std::string_view s) {
  u32(static_cast<uint32_t>(s.size()));
  buf_.append(s.data(), s.size());
}

void ByteReader::need(size_t n) const {
  if (static_cast<size_t>(end_ - p_) < n) throw std::runtime_error("container: truncated payload");
}

uint8_t ByteReader::u8() {
  need(1);
  return static_cast<uint8_t>(*p_++);
}

uint32_t ByteReader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(p_[i])) << (8 * i);
  p_ += 4;
  return v;
}

uint64_t ByteReader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(p_[i])) << (8 * i);
  p_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::bytes(void* out, size_t n) {
  need(n);
  std::memcpy(out, p_, n);
  p_ += n;
}

std::string ByteReader::str() {
  const uint32_t n = u32();
  need(n);
  std::string s(p_, n);
  p_ += n;
  return s;
}

const std::string* Container::find(std::string_view name) const {
  for (const auto& [key, payload] : sections)
    if (key == name) return &payload;
  return nullptr;
}

const std::string& Container::at(std::string_view name) const {
  const std::string* p = find(name);
  if (!p) throw std::runtime_error("container: missing section '" + std::string(name) + "'");
  return *p;
}

void write_container(const std::filesystem::path& path, std::string_view magic,
                     const std::vector<std::pair<std::string, std::string>>& sections) {
  if (magic.size() != 4) throw std::invalid_argument("container: magic must be 4 bytes");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("container: cannot open for writing: " + path.string());
  out.write(magic.data(), 4);
  ByteWriter head;
  head.u32(kContainerVersion);
  out.write(head.data().data(), static_cast<std::streamsize>(head.data().size()));
  for (const auto& [name, payload] : sections) {
    ByteWriter sec;
    sec.str(name);
    sec.u64(payload.size());
    out.write(sec.data().data(), static_cast<std::streamsize>(sec.data().size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (!out) throw std::runtime_error("container: write failed: " + path.string());
}

Container read_container(const std::filesystem::path& path, std::string_view expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("container: cannot open: " + path.string());
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < 8) throw std::runtime_error("container: file too small: " + path.string());

  Container c;
  c.magic = raw.substr(0, 4);
  if (c.magic != expected_magic)
    throw std::runtime_error("container: bad magic in " + path.string() + " (expected " +
                             std::string(expected_magic) + ", got " + c.magic + ")");
  ByteReader r(std::string_view(raw).substr(4));
  c.version = r.u32();
  if (c.version != kContainerVersion)
    throw std::runtime_error("container: unsupported format version in " + path.string());
  while (r.remaining() > 0) {
    std::string name = r.str();
    const uint64_t len = r.u64();
    std::string payload(len, '\0');
    r.bytes(payload.data(), len);
    c.sections.emplace_back(std::move(name), std::move(payload));
  }
  return c;
}

void put_dense(ByteWriter& w, const Eigen::MatrixXd& m) {
  w.u64(static_cast<uint64_t>(m.rows()));
  w.u64(static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
}

Eigen::MatrixXd get_dense(ByteReader& r) {
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
  return m;
}

void put_mask(ByteWriter& w, const MaskMatrix& m) {
  w.u64(static_cast<uint64_t>(m.rows()));
  w.u64(static_cast<uint64_t>(m.cols()));
  if (m.size() > 0) w.bytes(m.data(), static_cast<size_t>(m.size()));
}

MaskMatrix get_mask(ByteReader& r) {
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  MaskMatrix m(rows, cols);
  if (m.size() > 0) r.bytes(m.data(), static_cast<size_t>(m.size()));
  return m;
}

void put_sparse(ByteWriter& w, const SparseRowMatrix& m) {
  SparseRowMatrix c = m;
  c.makeCompressed();
  w.u64(static_cast<uint64_t>(c.rows()));
  w.u64(static_cast<uint64_t>(c.cols()));
  w.u64(static_cast<uint64_t>(c.nonZeros()));
  for (Eigen::Index i = 0; i <= c.rows(); ++i) w.u64(static_cast<uint64_t>(c.outerIndexPtr()[i]));
  for (Eigen::Index k = 0; k < c.nonZeros(); ++k) w.u32(static_cast<uint32_t>(c.innerIndexPtr()[k]));
  for (Eigen::Index k = 0; k < c.nonZeros(); ++k) w.f64(c.valuePtr()[k]);
}

SparseRowMatrix get_sparse(ByteReader& r) {
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  const auto nnz = static_cast<Eigen::Index>(r.u64());
  std::vector<uint64_t> outer(static_cast<size_t>(rows) + 1);
  for (auto& v : outer) v = r.u64();
  SparseRowMatrix m(rows, cols);
  m.reserve(Eigen::VectorXi::Constant(static_cast<int>(rows), 0));
  std::vector<uint32_t> inner(static_cast<size_t>(nnz));
  for (auto& v : inner) v = r.u32();
  std::vector<double> vals(static_cast<size_t>(nnz));
  for (auto& v : vals) v = r.f64();

  std::vector<Eigen::Triplet<double, int32_t>> trips;
  trips.reserve(static_cast<size_t>(nnz));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (uint64_t k = outer[static_cast<size_t>(i)]; k < outer[static_cast<size_t>(i) + 1]; ++k)
      trips.emplace_back(static_cast<int32_t>(i), static_cast<int32_t>(inner[k]), vals[k]);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void put_i32_vector(ByteWriter& w, const std::vector<int32_t>& v) {
  w.u64(v.size());
  for (int32_t x : v) w.i32(x);
}

std::vector<int32_t> get_i32_vector(ByteReader& r) {
  std::vector<int32_t> v(r.u64());
  for (auto& x : v) x = r.i32();
  return v;
}

void put_string_vector(ByteWriter& w, const std::vector<std::string>& v) {
  w.u64(v.size());
  for (const auto& s : v) w.str(s);
}

std::vector<std::string> get_string_vector(ByteReader& r) {
  std::vector<std::string> v(r.u64());
  for (auto& s : v) s = r.str();
  return v;
}

}  // namespace spiketext
