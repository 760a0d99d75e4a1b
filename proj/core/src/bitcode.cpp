#include "mimp/bitcode.hpp"

#include <algorithm>
#include <bit>

#include "mimp/error.hpp"

namespace mimp {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::out_of_region: return "out-of-region";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::degenerate_channel: return "degenerate-channel";
    case Errc::division_by_zero: return "division-by-zero";
    case Errc::no_inverse: return "no-inverse";
    case Errc::bound_invalid: return "bound-invalid";
    case Errc::invalid_record: return "invalid-record";
    case Errc::invalid_registration: return "invalid-registration";
    case Errc::protocol_error: return "protocol-error";
    case Errc::invalid_profiles: return "invalid-profiles";
    case Errc::corrupt_index: return "corrupt-index";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::stage_error: return "stage-error";
    case Errc::internal_error: return "internal-error";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitCode::BitCode(std::size_t length) : size_(length), words_(word_count(length), 0) {}

BitCode BitCode::from_uint(std::uint64_t value, std::size_t length) {
  require(length <= 64, Errc::invalid_parameter, "from_uint supports at most 64 bits");
  require(length == 64 || (value >> length) == 0, Errc::invalid_parameter,
          "value does not fit in the requested length");
  BitCode code(length);
  if (length > 0) code.words_[0] = value;
  return code;
}

BitCode BitCode::from_binary(std::string_view digits) {
  BitCode code(digits.size());
  for (std::size_t k = 0; k < digits.size(); ++k) {
    const char c = digits[digits.size() - 1 - k];
    require(c == '0' || c == '1', Errc::invalid_parameter, "binary digit expected");
    if (c == '1') code.set(k, true);
  }
  return code;
}

BitCode BitCode::from_hex(std::string_view hex, std::size_t length) {
  require(hex.size() == (length + 3) / 4, Errc::invalid_parameter,
          "hex string length does not match bit length");
  BitCode code(length);
  for (std::size_t n = 0; n < hex.size(); ++n) {
    const int v = hex_value(hex[hex.size() - 1 - n]);
    require(v >= 0, Errc::invalid_parameter, "hex digit expected");
    for (int b = 0; b < 4; ++b) {
      if (((v >> b) & 1) == 0) continue;
      const std::size_t pos = n * 4 + static_cast<std::size_t>(b);
      require(pos < length, Errc::invalid_parameter, "hex value exceeds bit length");
      code.set(pos, true);
    }
  }
  return code;
}

bool BitCode::get(std::size_t i) const {
  require(i < size_, Errc::invalid_parameter, "bit index out of range");
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

void BitCode::set(std::size_t i, bool value) {
  require(i < size_, Errc::invalid_parameter, "bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % kWordBits);
  if (value) {
    words_[i / kWordBits] |= mask;
  } else {
    words_[i / kWordBits] &= ~mask;
  }
}

void BitCode::flip(std::size_t i) {
  require(i < size_, Errc::invalid_parameter, "bit index out of range");
  words_[i / kWordBits] ^= std::uint64_t{1} << (i % kWordBits);
}

std::uint64_t BitCode::to_uint() const {
  require(size_ <= 64, Errc::invalid_parameter, "code longer than 64 bits has no uint form");
  return words_.empty() ? 0 : words_[0];
}

std::string BitCode::to_binary() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[size_ - 1 - i] = '1';
  }
  return out;
}

std::string BitCode::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t nibbles = (size_ + 3) / 4;
  std::string out(nibbles, '0');
  for (std::size_t n = 0; n < nibbles; ++n) {
    const std::size_t pos = n * 4;
    const std::uint64_t word = words_[pos / kWordBits] >> (pos % kWordBits);
    out[nibbles - 1 - n] = kDigits[word & 0xF];
  }
  return out;
}

BitCode BitCode::slice(std::size_t offset, std::size_t length) const {
  require(offset + length <= size_, Errc::invalid_parameter, "slice out of range");
  BitCode out(length);
  for (std::size_t w = 0; w < out.words_.size(); ++w) {
    const std::size_t pos = offset + w * kWordBits;
    const std::size_t idx = pos / kWordBits;
    const std::size_t shift = pos % kWordBits;
    std::uint64_t value = words_[idx] >> shift;
    if (shift != 0 && idx + 1 < words_.size()) value |= words_[idx + 1] << (kWordBits - shift);
    out.words_[w] = value;
  }
  out.mask_tail();
  return out;
}

void BitCode::append(const BitCode& tail) {
  const std::size_t old = size_;
  size_ += tail.size_;
  words_.resize(word_count(size_), 0);
  for (std::size_t i = 0; i < tail.size_; ++i) {
    if (tail.get(i)) set(old + i, true);
  }
}

std::size_t BitCode::popcount() const noexcept {
  std::size_t n = 0;
  for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool operator<(const BitCode& a, const BitCode& b) noexcept {
  if (a.size_ != b.size_) return a.size_ < b.size_;
  return std::lexicographical_compare(a.words_.rbegin(), a.words_.rend(), b.words_.rbegin(),
                                      b.words_.rend());
}

void BitCode::mask_tail() noexcept {
  const std::size_t rem = size_ % kWordBits;
  if (rem != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
}

std::size_t hamming_distance(const BitCode& a, const BitCode& b) {
  require(a.size() == b.size(), Errc::invalid_parameter, "hamming distance needs equal lengths");
  std::size_t d = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  return d;
}

std::size_t SegmentationPlan::max_length() const noexcept {
  return lengths.empty() ? 0 : lengths.front();
}

SegmentationPlan SegmentationPlan::make(std::size_t total_bits, std::size_t count) {
  require(count >= 1 && count <= total_bits, Errc::invalid_parameter,
          "segment count must satisfy 1 <= L <= D");
  SegmentationPlan plan;
  plan.total_bits = total_bits;
  plan.count = count;
  const std::size_t base = total_bits / count;
  const std::size_t longer = total_bits % count;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = base + (i < longer ? 1 : 0);
    plan.lengths.push_back(len);
    plan.offsets.push_back(offset);
    offset += len;
  }
  return plan;
}

std::vector<BitCode> segment(const BitCode& code, std::size_t count) {
  const auto plan = SegmentationPlan::make(code.size(), count);
  std::vector<BitCode> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(code.slice(plan.offsets[i], plan.lengths[i]));
  return out;
}

BitCode concatenate(const std::vector<BitCode>& pieces) {
  BitCode out;
  for (const auto& p : pieces) out.append(p);
  return out;
}

}  // namespace mimp
