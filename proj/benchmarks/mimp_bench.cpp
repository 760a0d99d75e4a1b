#include <benchmark/benchmark.h>

#include "mimp/protocol.hpp"

using namespace mimp;

namespace {

BitCode random_code(std::size_t bits, Rng& rng) {
  BitCode c(bits);
  for (std::size_t i = 0; i < bits; ++i) c.set(i, rng() & 1U);
  return c;
}

void BM_NestedSignature(benchmark::State& state) {
  Rng rng(1);
  const auto ctx = MontgomeryContext::generate(1, 2, 15, 15, rng);
  const auto& keys = ctx.tables[0];
  const auto owner = keys.owner_primitives(15, 15);
  std::vector<BitCode> subs;
  for (int i = 0; i < 1024; ++i) subs.push_back(random_code(14, rng));
  std::size_t n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nested_signature(subs[n++ & 1023], keys.user, owner));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_NestedSignature);

void BM_BitResidueTable(benchmark::State& state) {
  Rng rng(2);
  const std::uint64_t mods[] = {32749};
  const Primitives p{draw_multiplier(mods, 15, rng), 32749, 15, 15};
  const BitResidueTable table(p, 14);
  std::uint64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.of_value(x++ & 0x3FFF, 14));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_BitResidueTable);

void BM_Enroll(benchmark::State& state) {
  Rng rng(3);
  const auto parties = setup_parties({400, 50, 2, 15, 15}, rng);
  const auto rec = random_code(400, rng);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(parties.user.enroll(rec, seed++));
}
BENCHMARK(BM_Enroll);

void BM_Query(benchmark::State& state) {
  Rng rng(4);
  auto parties = setup_parties({400, 50, 2, 15, 15}, rng);
  std::vector<EnrolmentMessage> msgs;
  for (std::int64_t n = 0; n < state.range(0); ++n) {
    msgs.push_back(parties.user.enroll(random_code(400, rng), static_cast<std::uint64_t>(n)));
  }
  build_index(msgs, parties.owner, parties.server);
  std::vector<BitCode> queries;
  for (int i = 0; i < 64; ++i) queries.push_back(random_code(400, rng));
  std::size_t n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(query(queries[n++ & 63], parties.user, parties.server));
  }
}
BENCHMARK(BM_Query)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
