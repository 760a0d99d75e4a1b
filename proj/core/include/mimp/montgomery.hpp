#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mimp/bitcode.hpp"
#include "mimp/mimp_core.hpp"

namespace mimp {

// Largest modulus width served by the sieve.
inline constexpr unsigned kMaxModulusBits = 20;
// Products of a residue and a multiplier must stay below 2^62.
inline constexpr unsigned kMaxProductBits = 62;

// Ascending primes in (0, limit); limit <= 2^kMaxModulusBits. Cached.
const std::vector<std::uint64_t>& primes_below(std::uint64_t limit);
bool is_prime(std::uint64_t n);

// (R, N) pair with its encoding widths: 0 < N < 2^modulus_bits (prime),
// 0 < R < 2^multiplier_bits, gcd(R, N) = 1.
struct Primitives {
  std::uint64_t multiplier = 1;  // R
  std::uint64_t modulus = 2;     // N
  unsigned multiplier_bits = 1;  // c_R
  unsigned modulus_bits = 2;     // c_N

  void validate() const;
  friend bool operator==(const Primitives&, const Primitives&) = default;
};

// M(x; R, N) = xR mod N.
std::uint64_t residue(std::uint64_t x, const Primitives& prim);

// Same value accumulated bit by bit from precomputed M(2^(b-1); R, N).
class BitResidueTable {
 public:
  BitResidueTable(const Primitives& prim, std::size_t max_bits);
  [[nodiscard]] std::uint64_t operator()(const BitCode& substring) const;
  [[nodiscard]] std::uint64_t of_value(std::uint64_t x, std::size_t bits) const;

 private:
  std::uint64_t modulus_;
  std::vector<std::uint64_t> weights_;
};

std::uint64_t residue_of_bits(const BitCode& substring, const Primitives& prim);

// R' in (0, N) with a R' = 1 (mod N); throws no_inverse when gcd(a, N) != 1.
std::uint64_t modular_inverse(std::uint64_t a, std::uint64_t modulus);

enum class SignatureLevel { single, nested };

struct SignatureSet {
  SignatureLevel level = SignatureLevel::single;
  std::vector<std::uint64_t> values;
  // (user slot t, owner slot v); v is unused for single signatures.
  std::vector<std::pair<std::size_t, std::size_t>> primitive_ids;

  friend bool operator==(const SignatureSet&, const SignatureSet&) = default;
};

SignatureSet single_signature(const BitCode& substring, std::span<const Primitives> user);

// psi_tv = M(M(x; R_t, N_t); R_v, N_v), emitted in (t, v) row-major order.
SignatureSet nested_signature(const BitCode& substring, std::span<const Primitives> user,
                              std::span<const Primitives> owner);

// z_t = M(x; R_t, N_t) * Rq_t, left unreduced.
std::vector<std::uint64_t> blind_query(const BitCode& substring, std::span<const Primitives> user,
                                       std::span<const std::uint64_t> query_multipliers);

// M(z; R_s, N_s). z may exceed N_s.
std::uint64_t server_map(std::uint64_t z, const Primitives& server);

// beta(s; c_R, c_N) = (s + c_R - 1) / nu(2^c_N).
double fp_bound(std::size_t substring_bits, unsigned multiplier_bits, unsigned modulus_bits);
// beta(s + c_N; 2 c_R, c_N)^(T^2).
double nested_fp_bound(std::size_t substring_bits, unsigned multiplier_bits,
                       unsigned modulus_bits, std::size_t signature_count);

// Draws `count` distinct primes below 2^modulus_bits.
std::vector<std::uint64_t> draw_moduli(std::size_t count, unsigned modulus_bits, Rng& rng);
// Uniform multiplier in (0, 2^multiplier_bits) coprime to every given modulus.
std::uint64_t draw_multiplier(std::span<const std::uint64_t> moduli, unsigned multiplier_bits,
                              Rng& rng);

// Primitive material of one hash table, across all three parties.
struct TableKeys {
  std::vector<Primitives> user;                 // (R_u, N_u) x T
  std::vector<std::uint64_t> server_moduli;     // N_s x T
  std::vector<std::uint64_t> owner_multipliers; // R_o x T
  std::vector<std::uint64_t> query_multipliers; // R_q x T, one per user slot
  std::vector<std::uint64_t> query_inverses;    // R'_q, T x T: [t][v] = Rq_t^-1 mod N_s,v
  std::vector<std::uint64_t> server_multipliers;// R_s, T x T: [t][v] = M(R'_q,tv; R_o,v, N_s,v)

  [[nodiscard]] std::vector<Primitives> owner_primitives(unsigned c_R, unsigned c_N) const;
};

struct MontgomeryContext {
  std::size_t signature_count = 2;  // T
  unsigned multiplier_bits = 15;    // c_R
  unsigned modulus_bits = 15;       // c_N
  std::vector<TableKeys> tables;

  static MontgomeryContext generate(std::size_t tables, std::size_t signature_count,
                                    unsigned multiplier_bits, unsigned modulus_bits, Rng& rng);

  // Checks Rq * R'q = 1 and R_s = M(R'q; R_o, N_s) for every table and slot.
  [[nodiscard]] bool verify() const;
};

// Parameter validation shared by every entry point that accepts widths.
void validate_widths(std::size_t substring_bits, unsigned multiplier_bits, unsigned modulus_bits);

}  // namespace mimp
