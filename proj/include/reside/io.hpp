#pragma once

// Binary file formats. All integers little-endian. Readers parse from a
// fully loaded buffer, validate every field, and reject truncation and
// trailing bytes with the offending byte offset.
//
//   grid  "RSDG"  u16 version=1, u32 rows, u32 cols, u8 dtype
//                 (0 = complex64 interleaved f32, 1 = complex128 f64),
//                 row-major payload
//   mask  "RSDM"  u16 version=1, u32 rows, u32 cols, rows*cols bytes of
//                 0/1 in centered (DC-at-center) layout
//   net   "RSDN"  u16 version=1, per conv layer: u32{oc,ic,3,3}, weight
//                 f32s in [oc][ic][ky][kx] order, u32{oc}, bias f32s

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reside/denoiser_net.hpp"
#include "reside/grid.hpp"
#include "reside/masks.hpp"

namespace reside {

class format_error : public std::runtime_error {
 public:
  format_error(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw io_error("cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) {
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    bytes(b, 2);
  }
  void u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void close() {
    out_.close();
    if (!out_) throw io_error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return buf_.size(); }

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > buf_.size()) {
      std::ostringstream msg;
      msg << "truncated file: need " << n << " byte(s) for " << what << ", have "
          << (buf_.size() - pos_);
      throw format_error(msg.str(), pos_);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  void expect_magic(const char* magic) {
    need(4, "magic");
    if (std::memcmp(buf_.data() + pos_, magic, 4) != 0)
      throw format_error(std::string("bad magic, expected \"") + magic + "\"", pos_);
    pos_ += 4;
  }
  void expect_end() const {
    if (pos_ != buf_.size()) {
      std::ostringstream msg;
      msg << "trailing bytes: expected file length " << pos_ << ", actual " << buf_.size();
      throw format_error(msg.str(), pos_);
    }
  }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace io_detail

enum class GridDtype : std::uint8_t { complex64 = 0, complex128 = 1 };

inline void write_grid(const std::string& path, const ComplexGrid& grid,
                       GridDtype dtype = GridDtype::complex128) {
  io_detail::Writer w(path);
  w.bytes("RSDG", 4);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(grid.rows()));
  w.u32(static_cast<std::uint32_t>(grid.cols()));
  w.u8(static_cast<std::uint8_t>(dtype));
  for (const Complex& v : grid.data()) {
    if (dtype == GridDtype::complex64) {
      w.f32(static_cast<float>(v.real()));
      w.f32(static_cast<float>(v.imag()));
    } else {
      w.f64(v.real());
      w.f64(v.imag());
    }
  }
  w.close();
}

inline ComplexGrid read_grid(const std::string& path) {
  io_detail::Reader r(path);
  r.expect_magic("RSDG");
  const std::uint16_t version = r.u16("version");
  if (version != 1) throw format_error("unsupported grid version " + std::to_string(version), r.offset() - 2);
  const std::uint32_t rows = r.u32("rows");
  const std::uint32_t cols = r.u32("cols");
  if (rows == 0 || cols == 0) throw format_error("zero grid dimension", r.offset() - 8);
  const std::uint8_t dtype = r.u8("dtype");
  if (dtype > 1) throw format_error("unknown dtype " + std::to_string(dtype), r.offset() - 1);

  ComplexGrid grid(rows, cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double re, im;
    if (dtype == 0) {
      re = static_cast<double>(r.f32("sample"));
      im = static_cast<double>(r.f32("sample"));
    } else {
      re = r.f64("sample");
      im = r.f64("sample");
    }
    if (!std::isfinite(re) || !std::isfinite(im))
      throw format_error("non-finite sample", r.offset() - (dtype == 0 ? 8 : 16));
    grid[i] = Complex(re, im);
  }
  r.expect_end();
  return grid;
}

inline void write_mask(const std::string& path, const SamplingMask& mask) {
  io_detail::Writer w(path);
  w.bytes("RSDM", 4);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(mask.rows()));
  w.u32(static_cast<std::uint32_t>(mask.cols()));
  // stored centered for human inspection
  std::vector<std::uint8_t> centered(mask.size(), 0);
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      centered[shift_to_centered(r, mask.rows()) * mask.cols() + shift_to_centered(c, mask.cols())] =
          mask.keep(r, c) ? 1 : 0;
    }
  }
  w.bytes(centered.data(), centered.size());
  w.close();
}

inline SamplingMask read_mask(const std::string& path) {
  io_detail::Reader r(path);
  r.expect_magic("RSDM");
  const std::uint16_t version = r.u16("version");
  if (version != 1) throw format_error("unsupported mask version " + std::to_string(version), r.offset() - 2);
  const std::uint32_t rows = r.u32("rows");
  const std::uint32_t cols = r.u32("cols");
  if (rows == 0 || cols == 0) throw format_error("zero mask dimension", r.offset() - 8);

  std::vector<std::uint8_t> centered(static_cast<std::size_t>(rows) * cols);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < centered.size(); ++i) {
    const std::uint8_t b = r.u8("mask byte");
    if (b > 1) throw format_error("mask byte must be 0 or 1, got " + std::to_string(b), r.offset() - 1);
    centered[i] = b;
    ones += b;
  }
  r.expect_end();
  if (ones == 0) throw format_error("mask has no sampled entries", r.size());

  std::vector<std::uint8_t> unshifted(centered.size(), 0);
  for (std::size_t rr = 0; rr < rows; ++rr) {
    for (std::size_t cc = 0; cc < cols; ++cc) {
      unshifted[shift_from_centered(rr, rows) * cols + shift_from_centered(cc, cols)] =
          centered[rr * cols + cc];
    }
  }
  return SamplingMask(rows, cols, std::move(unshifted));
}

template <typename T>
void write_net(const std::string& path, const DenoiserNet<T>& net) {
  io_detail::Writer w(path);
  w.bytes("RSDN", 4);
  w.u16(1);
  for (int l = 0; l < DenoiserNet<T>::layer_count(); ++l) {
    const std::size_t oc = DenoiserNet<T>::out_channels(l);
    const std::size_t ic = DenoiserNet<T>::in_channels(l);
    w.u32(static_cast<std::uint32_t>(oc));
    w.u32(static_cast<std::uint32_t>(ic));
    w.u32(3);
    w.u32(3);
    const T* wp = net.params().data() + net_detail::layer_offset(l);
    for (std::size_t i = 0; i < net_detail::weight_count(l); ++i)
      w.f32(static_cast<float>(wp[i]));
    w.u32(static_cast<std::uint32_t>(oc));
    const T* bp = wp + net_detail::weight_count(l);
    for (std::size_t i = 0; i < oc; ++i) w.f32(static_cast<float>(bp[i]));
  }
  w.close();
}

template <typename T>
DenoiserNet<T> read_net(const std::string& path) {
  io_detail::Reader r(path);
  r.expect_magic("RSDN");
  const std::uint16_t version = r.u16("version");
  if (version != 1) throw format_error("unsupported net version " + std::to_string(version), r.offset() - 2);
  DenoiserNet<T> net;
  for (int l = 0; l < DenoiserNet<T>::layer_count(); ++l) {
    const std::size_t oc = DenoiserNet<T>::out_channels(l);
    const std::size_t ic = DenoiserNet<T>::in_channels(l);
    const std::uint32_t dims[4] = {r.u32("out channels"), r.u32("in channels"),
                                   r.u32("kernel rows"), r.u32("kernel cols")};
    if (dims[0] != oc || dims[1] != ic || dims[2] != 3 || dims[3] != 3)
      throw format_error("layer shape does not match the fixed architecture", r.offset() - 16);
    T* wp = net.params().data() + net_detail::layer_offset(l);
    for (std::size_t i = 0; i < net_detail::weight_count(l); ++i)
      wp[i] = static_cast<T>(r.f32("weight"));
    if (r.u32("bias length") != oc)
      throw format_error("bias length does not match layer", r.offset() - 4);
    T* bp = wp + net_detail::weight_count(l);
    for (std::size_t i = 0; i < oc; ++i) bp[i] = static_cast<T>(r.f32("bias"));
  }
  r.expect_end();
  if (!net.all_finite()) throw format_error("non-finite parameter", r.size());
  return net;
}

// 8-bit magnitude dump for quick looks; magnitude scaled linearly so the
// image max maps to 255.
inline void write_magnitude_pgm(const std::string& path, const ComplexGrid& grid) {
  double peak = 0.0;
  for (const Complex& v : grid.data()) peak = std::max(peak, std::abs(v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "P5\n" << grid.cols() << " " << grid.rows() << "\n255\n";
  for (const Complex& v : grid.data()) {
    const double scaled = peak > 0.0 ? std::abs(v) / peak * 255.0 : 0.0;
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::min(255.0, scaled))));
  }
  if (!out) throw io_error("write failed: " + path);
}

// Absolute error against a reference, amplified 1.5x relative to the
// reference peak and clamped.
inline void write_error_pgm(const std::string& path, const ComplexGrid& truth,
                            const ComplexGrid& estimate) {
  if (!truth.same_shape(estimate)) throw std::invalid_argument("write_error_pgm: shape mismatch");
  double peak = 0.0;
  for (const Complex& v : truth.data()) peak = std::max(peak, std::abs(v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "P5\n" << truth.cols() << " " << truth.rows() << "\n255\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double err = std::abs(truth[i] - estimate[i]);
    const double scaled = peak > 0.0 ? 1.5 * err / peak * 255.0 : 0.0;
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::min(255.0, scaled))));
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace reside
