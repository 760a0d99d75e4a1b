#include "mimp/montgomery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "mimp/error.hpp"

namespace mimp {

const std::vector<std::uint64_t>& primes_below(std::uint64_t limit) {
  require(limit <= (std::uint64_t{1} << kMaxModulusBits), Errc::invalid_parameter,
          "prime sieve limited to 2^20");
  static std::mutex mutex;
  static std::map<std::uint64_t, std::vector<std::uint64_t>> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(limit);
  if (inserted && limit > 2) {
    std::vector<bool> composite(limit, false);
    for (std::uint64_t i = 2; i < limit; ++i) {
      if (composite[i]) continue;
      it->second.push_back(i);
      for (std::uint64_t j = i * i; j < limit; j += i) composite[j] = true;
    }
  }
  return it->second;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

void validate_widths(std::size_t substring_bits, unsigned multiplier_bits, unsigned modulus_bits) {
  require(multiplier_bits >= 1 && modulus_bits >= 2, Errc::invalid_parameter,
          "encoding widths too small");
  require(substring_bits + multiplier_bits <= kMaxProductBits, Errc::invalid_parameter,
          "s + c_R must not exceed 62");
  require(modulus_bits + multiplier_bits <= kMaxProductBits, Errc::invalid_parameter,
          "c_N + c_R must not exceed 62");
}

void Primitives::validate() const {
  require(multiplier_bits >= 1 && multiplier_bits < 63 && modulus_bits >= 2 && modulus_bits < 63,
          Errc::invalid_parameter, "encoding widths out of range");
  require(modulus < (std::uint64_t{1} << modulus_bits) && is_prime(modulus),
          Errc::invalid_parameter, "modulus must be a prime below 2^c_N");
  require(multiplier > 0 && multiplier < (std::uint64_t{1} << multiplier_bits),
          Errc::invalid_parameter, "multiplier must lie in (0, 2^c_R)");
  require(std::gcd(multiplier, modulus) == 1, Errc::invalid_parameter,
          "multiplier must be coprime to the modulus");
}

std::uint64_t residue(std::uint64_t x, const Primitives& prim) {
  // (x mod N) R < 2^(c_N + c_R) <= 2^62
  return (x % prim.modulus) * (prim.multiplier % prim.modulus) % prim.modulus;
}

BitResidueTable::BitResidueTable(const Primitives& prim, std::size_t max_bits)
    : modulus_(prim.modulus) {
  require(max_bits + prim.multiplier_bits <= kMaxProductBits, Errc::invalid_parameter,
          "substring too long for the multiplier width");
  weights_.reserve(max_bits);
  std::uint64_t power = 1 % prim.modulus;  // 2^(b-1) mod N
  for (std::size_t b = 0; b < max_bits; ++b) {
    weights_.push_back(power * (prim.multiplier % prim.modulus) % prim.modulus);
    power = power * 2 % prim.modulus;
  }
}

std::uint64_t BitResidueTable::of_value(std::uint64_t x, std::size_t bits) const {
  require(bits <= weights_.size(), Errc::invalid_parameter, "substring longer than table");
  std::uint64_t acc = 0;
  for (std::size_t b = 0; b < bits; ++b) {
    if ((x >> b) & 1U) acc += weights_[b];
  }
  return acc % modulus_;
}

std::uint64_t BitResidueTable::operator()(const BitCode& substring) const {
  require(substring.size() <= weights_.size(), Errc::invalid_parameter,
          "substring longer than table");
  std::uint64_t acc = 0;
  for (std::size_t b = 0; b < substring.size(); ++b) {
    if (substring.get(b)) acc += weights_[b];
  }
  return acc % modulus_;
}

std::uint64_t residue_of_bits(const BitCode& substring, const Primitives& prim) {
  require(substring.size() + prim.multiplier_bits <= kMaxProductBits, Errc::invalid_parameter,
          "substring length exceeds 62 - c_R");
  return BitResidueTable(prim, substring.size())(substring);
}

std::uint64_t modular_inverse(std::uint64_t a, std::uint64_t modulus) {
  require(modulus >= 2, Errc::invalid_parameter, "modulus must be >= 2");
  std::int64_t old_r = static_cast<std::int64_t>(a % modulus);
  std::int64_t r = static_cast<std::int64_t>(modulus);
  std::int64_t old_s = 1;
  std::int64_t s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    old_r -= q * r;
    std::swap(old_r, r);
    old_s -= q * s;
    std::swap(old_s, s);
  }
  require(old_r == 1, Errc::no_inverse, "value is not coprime to the modulus");
  const auto m = static_cast<std::int64_t>(modulus);
  return static_cast<std::uint64_t>(((old_s % m) + m) % m);
}

SignatureSet single_signature(const BitCode& substring, std::span<const Primitives> user) {
  const std::uint64_t x = substring.to_uint();
  SignatureSet set;
  set.level = SignatureLevel::single;
  for (std::size_t t = 0; t < user.size(); ++t) {
    validate_widths(substring.size(), user[t].multiplier_bits, user[t].modulus_bits);
    set.values.push_back(residue(x, user[t]));
    set.primitive_ids.emplace_back(t, 0);
  }
  return set;
}

SignatureSet nested_signature(const BitCode& substring, std::span<const Primitives> user,
                              std::span<const Primitives> owner) {
  const auto inner = single_signature(substring, user);
  SignatureSet set;
  set.level = SignatureLevel::nested;
  for (std::size_t t = 0; t < inner.values.size(); ++t) {
    for (std::size_t v = 0; v < owner.size(); ++v) {
      set.values.push_back(residue(inner.values[t], owner[v]));
      set.primitive_ids.emplace_back(t, v);
    }
  }
  return set;
}

std::vector<std::uint64_t> blind_query(const BitCode& substring, std::span<const Primitives> user,
                                       std::span<const std::uint64_t> query_multipliers) {
  require(query_multipliers.size() == user.size(), Errc::invalid_parameter,
          "one query multiplier per user slot");
  const auto inner = single_signature(substring, user);
  std::vector<std::uint64_t> z;
  z.reserve(inner.values.size());
  for (std::size_t t = 0; t < inner.values.size(); ++t) {
    // gamma < 2^c_N and Rq < 2^c_R, so the product fits.
    z.push_back(inner.values[t] * query_multipliers[t]);
  }
  return z;
}

std::uint64_t server_map(std::uint64_t z, const Primitives& server) { return residue(z, server); }

double fp_bound(std::size_t substring_bits, unsigned multiplier_bits, unsigned modulus_bits) {
  require(modulus_bits <= kMaxModulusBits, Errc::invalid_parameter, "c_N limited to 20");
  const double primes = static_cast<double>(primes_below(std::uint64_t{1} << modulus_bits).size());
  const double bad = static_cast<double>(substring_bits + multiplier_bits) - 1.0;
  require(static_cast<double>(substring_bits + multiplier_bits) < primes, Errc::bound_invalid,
          "bound requires s + c_R < nu(2^c_N)");
  return bad / primes;
}

double nested_fp_bound(std::size_t substring_bits, unsigned multiplier_bits,
                       unsigned modulus_bits, std::size_t signature_count) {
  const double beta = fp_bound(substring_bits + modulus_bits, 2 * multiplier_bits, modulus_bits);
  return std::pow(beta, static_cast<double>(signature_count * signature_count));
}

std::vector<std::uint64_t> draw_moduli(std::size_t count, unsigned modulus_bits, Rng& rng) {
  const auto& primes = primes_below(std::uint64_t{1} << modulus_bits);
  require(count <= primes.size(), Errc::invalid_parameter, "not enough primes for distinct moduli");
  std::vector<std::uint64_t> out;
  std::uniform_int_distribution<std::size_t> pick(0, primes.size() - 1);
  while (out.size() < count) {
    const auto candidate = primes[pick(rng)];
    if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(candidate);
  }
  return out;
}

std::uint64_t draw_multiplier(std::span<const std::uint64_t> moduli, unsigned multiplier_bits,
                              Rng& rng) {
  require(multiplier_bits >= 1 && multiplier_bits < 63, Errc::invalid_parameter,
          "multiplier width out of range");
  std::uniform_int_distribution<std::uint64_t> pick(1, (std::uint64_t{1} << multiplier_bits) - 1);
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const auto r = pick(rng);
    if (std::all_of(moduli.begin(), moduli.end(),
                    [r](std::uint64_t n) { return std::gcd(r, n) == 1; })) {
      return r;
    }
  }
  fail(Errc::invalid_parameter, "no multiplier coprime to the moduli in range");
}

std::vector<Primitives> TableKeys::owner_primitives(unsigned c_R, unsigned c_N) const {
  std::vector<Primitives> out;
  for (std::size_t v = 0; v < server_moduli.size(); ++v) {
    out.push_back({owner_multipliers[v], server_moduli[v], c_R, c_N});
  }
  return out;
}

MontgomeryContext MontgomeryContext::generate(std::size_t tables, std::size_t signature_count,
                                              unsigned multiplier_bits, unsigned modulus_bits,
                                              Rng& rng) {
  require(signature_count >= 1, Errc::invalid_parameter, "T must be >= 1");
  validate_widths(0, multiplier_bits, modulus_bits);
  MontgomeryContext ctx;
  ctx.signature_count = signature_count;
  ctx.multiplier_bits = multiplier_bits;
  ctx.modulus_bits = modulus_bits;
  const std::size_t T = signature_count;
  for (std::size_t i = 0; i < tables; ++i) {
    TableKeys keys;
    for (const auto n : draw_moduli(T, modulus_bits, rng)) {
      const std::uint64_t single[] = {n};
      keys.user.push_back({draw_multiplier(single, multiplier_bits, rng), n, multiplier_bits,
                           modulus_bits});
    }
    keys.server_moduli = draw_moduli(T, modulus_bits, rng);
    for (const auto n : keys.server_moduli) {
      const std::uint64_t single[] = {n};
      keys.owner_multipliers.push_back(draw_multiplier(single, multiplier_bits, rng));
    }
    for (std::size_t t = 0; t < T; ++t) {
      keys.query_multipliers.push_back(draw_multiplier(keys.server_moduli, multiplier_bits, rng));
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < T; ++v) {
        const auto n = keys.server_moduli[v];
        const auto inv = modular_inverse(keys.query_multipliers[t], n);
        keys.query_inverses.push_back(inv);
        keys.server_multipliers.push_back(
            residue(inv, {keys.owner_multipliers[v], n, multiplier_bits, modulus_bits}));
      }
    }
    ctx.tables.push_back(std::move(keys));
  }
  return ctx;
}

bool MontgomeryContext::verify() const {
  const std::size_t T = signature_count;
  for (const auto& keys : tables) {
    if (keys.user.size() != T || keys.server_moduli.size() != T ||
        keys.owner_multipliers.size() != T || keys.query_multipliers.size() != T ||
        keys.query_inverses.size() != T * T || keys.server_multipliers.size() != T * T) {
      return false;
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < T; ++v) {
        const auto n = keys.server_moduli[v];
        const auto inv = keys.query_inverses[t * T + v];
        if (keys.query_multipliers[t] % n * inv % n != 1) return false;
        if (keys.server_multipliers[t * T + v] != inv * keys.owner_multipliers[v] % n) return false;
      }
    }
  }
  return true;
}

}  // namespace mimp
