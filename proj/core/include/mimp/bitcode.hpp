#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mimp {

// Fixed-length binary string. Bit i (0-based) is position i+1 in the
// 1-based convention used throughout: position 1 is the least-significant
// bit of the code's natural-number representation.
class BitCode {
 public:
  BitCode() = default;
  explicit BitCode(std::size_t length);

  // From an integer; `length` must be <= 64 and `value` must fit.
  static BitCode from_uint(std::uint64_t value, std::size_t length);
  // Most-significant character first, e.g. "0010" has only position 2 set.
  static BitCode from_binary(std::string_view digits);
  // Lowercase or uppercase hex, most-significant nibble first.
  static BitCode from_hex(std::string_view hex, std::size_t length);

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

  [[nodiscard]] bool get(std::size_t i) const;
  void set(std::size_t i, bool value);
  void flip(std::size_t i);

  // Natural-number value; throws invalid_parameter when size() > 64.
  [[nodiscard]] std::uint64_t to_uint() const;
  [[nodiscard]] std::string to_binary() const;
  [[nodiscard]] std::string to_hex() const;

  // Copy of bits [offset, offset + length).
  [[nodiscard]] BitCode slice(std::size_t offset, std::size_t length) const;
  void append(const BitCode& tail);

  [[nodiscard]] std::size_t popcount() const noexcept;
  [[nodiscard]] const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitCode& a, const BitCode& b) noexcept {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }
  friend bool operator<(const BitCode& a, const BitCode& b) noexcept;

 private:
  void mask_tail() noexcept;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Throws invalid_parameter on length mismatch.
std::size_t hamming_distance(const BitCode& a, const BitCode& b);

// Substring lengths for splitting D bits into L pieces: the first D mod L
// pieces get ceil(D/L) bits, the rest one bit fewer.
struct SegmentationPlan {
  std::size_t total_bits = 0;
  std::size_t count = 0;
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> offsets;

  [[nodiscard]] std::size_t max_length() const noexcept;  // s = ceil(D/L)

  static SegmentationPlan make(std::size_t total_bits, std::size_t count);
};

std::vector<BitCode> segment(const BitCode& code, std::size_t count);
BitCode concatenate(const std::vector<BitCode>& pieces);

}  // namespace mimp
