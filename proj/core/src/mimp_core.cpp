#include "mimp/mimp_core.hpp"

#include <cmath>

#include "mimp/error.hpp"

namespace mimp {

VariantSet make_database_variants_at(const BitCode& substring, std::size_t flip_position) {
  require(!substring.empty(), Errc::invalid_parameter, "empty substring");
  require(flip_position < substring.size(), Errc::invalid_parameter, "flip position out of range");
  VariantSet set;
  set.side = Side::database;
  set.flip_position = flip_position;
  set.entries.push_back(substring);
  BitCode variant = substring;
  variant.flip(flip_position);
  set.entries.push_back(std::move(variant));
  return set;
}

VariantSet make_database_variants(const BitCode& substring, Rng& rng) {
  require(!substring.empty(), Errc::invalid_parameter, "empty substring");
  std::uniform_int_distribution<std::size_t> pick(0, substring.size() - 1);
  return make_database_variants_at(substring, pick(rng));
}

VariantSet make_query_variants(const BitCode& substring) {
  require(!substring.empty(), Errc::invalid_parameter, "empty substring");
  VariantSet set;
  set.side = Side::query;
  set.entries.reserve(substring.size());
  for (std::size_t k = 0; k < substring.size(); ++k) {
    BitCode variant = substring;
    variant.flip(k);
    set.entries.push_back(std::move(variant));
  }
  return set;
}

std::size_t collision_count(const VariantSet& db, const VariantSet& query) {
  require(db.side == Side::database && query.side == Side::query, Errc::invalid_parameter,
          "collision_count expects (database, query) variant sets");
  require(!db.entries.empty() && !query.entries.empty(), Errc::invalid_parameter,
          "empty variant set");
  require(db.entries.front().size() == query.entries.front().size(), Errc::invalid_parameter,
          "variant sets built from substrings of different length");
  std::size_t count = 0;
  for (const auto& p : db.entries) {
    for (const auto& q : query.entries) {
      if (p == q) ++count;
    }
  }
  return count;
}

ObfuscatedDistance ObfuscatedDistance::from_count(std::size_t m, std::size_t segments,
                                                  std::size_t max_length) {
  require(m <= segments, Errc::invalid_parameter, "m exceeds L");
  ObfuscatedDistance out;
  out.m = m;
  out.segments = segments;
  out.max_length = max_length;
  out.interval_low = 2 * (segments - m);
  out.interval_high = max_length * (segments - m) + 2 * m;
  return out;
}

std::vector<std::size_t> draw_flip_positions(const SegmentationPlan& plan, Rng& rng) {
  std::vector<std::size_t> flips;
  flips.reserve(plan.count);
  for (const auto len : plan.lengths) {
    std::uniform_int_distribution<std::size_t> pick(0, len - 1);
    flips.push_back(pick(rng));
  }
  return flips;
}

ObfuscatedDistance obfuscated_distance_with_flips(const BitCode& record, const BitCode& query,
                                                  std::size_t segments,
                                                  const std::vector<std::size_t>& flips) {
  require(record.size() == query.size(), Errc::invalid_parameter, "code length mismatch");
  const auto plan = SegmentationPlan::make(record.size(), segments);
  require(flips.size() == segments, Errc::invalid_parameter, "one flip position per segment");
  std::size_t m = 0;
  for (std::size_t i = 0; i < segments; ++i) {
    const auto p = record.slice(plan.offsets[i], plan.lengths[i]);
    const auto q = query.slice(plan.offsets[i], plan.lengths[i]);
    m += collision_count(make_database_variants_at(p, flips[i]), make_query_variants(q));
  }
  return ObfuscatedDistance::from_count(m, segments, plan.max_length());
}

ObfuscatedDistance obfuscated_distance(const BitCode& record, const BitCode& query,
                                       std::size_t segments, Rng& rng) {
  require(record.size() == query.size(), Errc::invalid_parameter, "code length mismatch");
  const auto plan = SegmentationPlan::make(record.size(), segments);
  return obfuscated_distance_with_flips(record, query, segments, draw_flip_positions(plan, rng));
}

std::size_t inference_region_low(std::size_t segments, std::size_t radius) {
  require(radius < 2 * segments, Errc::invalid_parameter, "inference region requires r < 2L");
  // smallest integer m with 2m >= 2L - r
  return (2 * segments - radius + 1) / 2;
}

bool in_inference_region(std::size_t m, std::size_t segments, std::size_t radius) {
  return m <= segments && m >= inference_region_low(segments, radius);
}

std::optional<double> pi_value(std::size_t m, std::size_t segments, std::size_t max_length,
                               std::size_t radius) {
  require(max_length >= 2, Errc::invalid_parameter, "pi requires s >= 2");
  if (!in_inference_region(m, segments, radius)) return std::nullopt;
  const auto iv = ObfuscatedDistance::from_count(m, segments, max_length);
  const double a = static_cast<double>(iv.interval_low);
  const double b = static_cast<double>(iv.interval_high);
  return (static_cast<double>(radius) - a + 1.0) / (b - a + 1.0);
}

std::size_t mu_threshold(double eta, std::size_t segments, std::size_t max_length,
                         std::size_t radius) {
  require(eta > 0.0 && eta < 1.0, Errc::invalid_parameter, "eta must lie in (0, 1)");
  require(max_length >= 2, Errc::invalid_parameter, "mu requires s >= 2");
  const std::size_t low = inference_region_low(segments, radius);
  const double target = eta - kEtaResolution / 2;
  const double s = static_cast<double>(max_length);
  const double L = static_cast<double>(segments);
  const double r = static_cast<double>(radius);
  const double denom = 2.0 + target * (s - 4.0);
  require(denom > 0.0, Errc::invalid_parameter, "non-positive denominator in mu threshold");
  const double bound = (target * (s * L - 2.0 * L + 1.0) + 2.0 * L - 1.0 - r) / denom;

  auto passes = [&](std::size_t m) { return *pi_value(m, segments, max_length, radius) >= target; };
  // Closed form, then settle rounding against pi itself so that
  // (m >= mu) <=> (pi(m) >= eta) holds exactly on the region.
  double start = std::ceil(bound);
  std::size_t mu = start <= static_cast<double>(low) ? low
                   : start > L                       ? segments + 1
                                                     : static_cast<std::size_t>(start);
  while (mu > low && passes(mu - 1)) --mu;
  while (mu <= segments && !passes(mu)) ++mu;
  return mu;
}

}  // namespace mimp
