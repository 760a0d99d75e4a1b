#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mimp/bitcode.hpp"

namespace mimp {

using Rng = std::mt19937_64;

enum class Side { database, query };

// Obfuscated substring set. Database side: {original, one-bit variant}.
// Query side: every one-bit variant of the original, entry k flips bit k.
struct VariantSet {
  Side side = Side::database;
  std::vector<BitCode> entries;
  std::size_t flip_position = 0;  // database side only, 0-based
};

VariantSet make_database_variants(const BitCode& substring, Rng& rng);
// Deterministic form used when the flip position is already known.
VariantSet make_database_variants_at(const BitCode& substring, std::size_t flip_position);
VariantSet make_query_variants(const BitCode& substring);

// Number of (database entry, query entry) pairs that are equal. Never
// exceeds one for well-formed sets.
std::size_t collision_count(const VariantSet& db, const VariantSet& query);

struct ObfuscatedDistance {
  std::size_t m = 0;          // collision-count sum over the L substrings
  std::size_t segments = 0;   // L
  std::size_t max_length = 0; // s = ceil(D/L)
  std::size_t interval_low = 0;
  std::size_t interval_high = 0;

  // Builds the concealment interval [2(L-m), s(L-m)+2m].
  static ObfuscatedDistance from_count(std::size_t m, std::size_t segments, std::size_t max_length);
};

// Draws one database flip per substring from `rng`, in substring order.
ObfuscatedDistance obfuscated_distance(const BitCode& record, const BitCode& query,
                                       std::size_t segments, Rng& rng);

// Flip positions that obfuscated_distance / enrolment would draw for a record
// of the given plan from an rng in the same state.
std::vector<std::size_t> draw_flip_positions(const SegmentationPlan& plan, Rng& rng);

ObfuscatedDistance obfuscated_distance_with_flips(const BitCode& record, const BitCode& query,
                                                  std::size_t segments,
                                                  const std::vector<std::size_t>& flips);

// Inference region L - r/2 <= m <= L; requires r < 2L.
[[nodiscard]] std::size_t inference_region_low(std::size_t segments, std::size_t radius);
[[nodiscard]] bool in_inference_region(std::size_t m, std::size_t segments, std::size_t radius);

// Probability that a uniform draw from the concealment interval of m does not
// exceed r. Empty when m falls outside the inference region.
std::optional<double> pi_value(std::size_t m, std::size_t segments, std::size_t max_length,
                               std::size_t radius);

// Resolution at which thresholds are quoted (four decimal places). mu is
// computed against eta - kEtaResolution / 2.
inline constexpr double kEtaResolution = 1e-4;

// Smallest integer m with pi(m) >= eta (up to kEtaResolution), clamped below
// by the inference region. May equal L + 1 when even m = L falls short.
std::size_t mu_threshold(double eta, std::size_t segments, std::size_t max_length,
                         std::size_t radius);

}  // namespace mimp
