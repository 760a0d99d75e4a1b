#include "mimp/protocol.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>

#include "mimp/error.hpp"

namespace mimp {

void SystemConfig::validate() const {
  require(segments >= 1 && segments <= code_bits, Errc::invalid_parameter,
          "segment count must satisfy 1 <= L <= D");
  require(signature_count >= 1, Errc::invalid_parameter, "T must be >= 1");
  require(modulus_bits >= 2 && modulus_bits <= kMaxModulusBits, Errc::invalid_parameter,
          "c_N must lie in [2, 20]");
  validate_widths(max_length(), multiplier_bits, modulus_bits);
}

// ---------------------------------------------------------------------------
// Message encoding: little-endian u64 fields, every array length-prefixed.

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::uint64_t u64() {
    require(bytes_.size() >= 8, Errc::protocol_error, "truncated message");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(bytes_[i])} << (8 * i);
    bytes_.remove_prefix(8);
    return v;
  }
  std::string_view take(std::size_t n) {
    require(bytes_.size() >= n, Errc::protocol_error, "truncated message");
    auto s = bytes_.substr(0, n);
    bytes_.remove_prefix(n);
    return s;
  }
  void finish() const { require(bytes_.empty(), Errc::protocol_error, "trailing bytes in message"); }

 private:
  std::string_view bytes_;
};

constexpr std::string_view kEnrolMagic = "MIMPENR1";
constexpr std::string_view kQueryMagic = "MIMPQRY1";

}  // namespace

std::string encode(const EnrolmentMessage& msg) {
  std::string out(kEnrolMagic);
  put_u64(out, msg.segments);
  put_u64(out, msg.signature_count);
  put_u64(out, msg.signatures.size());
  for (const auto v : msg.signatures) put_u64(out, v);
  return out;
}

EnrolmentMessage decode_enrolment(std::string_view bytes) {
  Reader in(bytes);
  require(in.take(kEnrolMagic.size()) == kEnrolMagic, Errc::protocol_error, "not an enrolment message");
  EnrolmentMessage msg;
  msg.segments = in.u64();
  msg.signature_count = in.u64();
  const auto n = in.u64();
  require(n == msg.segments * 2 * msg.signature_count, Errc::protocol_error,
          "enrolment size does not match L x 2 x T");
  msg.signatures.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) msg.signatures.push_back(in.u64());
  in.finish();
  return msg;
}

std::string encode(const QueryMessage& msg) {
  std::string out(kQueryMagic);
  put_u64(out, msg.query_id);
  put_u64(out, msg.blinded.size());
  for (const auto& table : msg.blinded) {
    put_u64(out, table.size());
    for (const auto v : table) put_u64(out, v);
  }
  return out;
}

QueryMessage decode_query(std::string_view bytes) {
  Reader in(bytes);
  require(in.take(kQueryMagic.size()) == kQueryMagic, Errc::protocol_error, "not a query message");
  QueryMessage msg;
  msg.query_id = in.u64();
  const auto tables = in.u64();
  require(tables < (1U << 24), Errc::protocol_error, "implausible table count");
  msg.blinded.resize(tables);
  for (auto& table : msg.blinded) {
    const auto n = in.u64();
    require(n < (1U << 24), Errc::protocol_error, "implausible variant count");
    table.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) table.push_back(in.u64());
  }
  in.finish();
  return msg;
}

// ---------------------------------------------------------------------------

bool audit_party_isolation(const PartyState& state) {
  std::set<Material> allowed;
  switch (state.role) {
    case Role::user:
      allowed = {Material::plaintext_code, Material::user_primitives, Material::query_multipliers};
      break;
    case Role::data_owner:
      allowed = {Material::owner_multipliers, Material::query_inverses, Material::server_moduli};
      break;
    case Role::server:
      allowed = {Material::server_moduli, Material::server_multipliers, Material::search_tables};
      break;
  }
  return std::includes(allowed.begin(), allowed.end(), state.held.begin(), state.held.end());
}

// ---------------------------------------------------------------------------

SearchIndex::SearchIndex(const IndexMetadata& meta) : meta_(meta), tables_(meta.segments) {}

bool SearchIndex::insert(std::size_t table, const std::string& key, RecordId id) {
  require(table < tables_.size(), Errc::invalid_parameter, "table index out of range");
  auto& bucket = tables_[table][key];
  if (std::find(bucket.begin(), bucket.end(), id) != bucket.end()) return false;
  bucket.push_back(id);
  return true;
}

const Bucket* SearchIndex::find(std::size_t table, const std::string& key) const {
  const auto& t = tables_[table];
  const auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

std::size_t SearchIndex::key_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.size();
  return n;
}

std::string make_bucket_key(std::span<const std::uint64_t> residues, unsigned modulus_bits) {
  const std::size_t width = (modulus_bits + 7) / 8;
  std::string key;
  key.reserve(residues.size() * width);
  for (const auto r : residues) {
    for (std::size_t b = 0; b < width; ++b) key.push_back(static_cast<char>((r >> (8 * b)) & 0xFF));
  }
  return key;
}

// ---------------------------------------------------------------------------

User::User(const SystemConfig& config, std::vector<std::vector<Primitives>> primitives)
    : config_(config), primitives_(std::move(primitives)) {
  config_.validate();
  require(primitives_.size() == config_.segments, Errc::invalid_parameter,
          "one primitive set per table");
  const auto s = config_.max_length();
  for (const auto& slots : primitives_) {
    require(slots.size() == config_.signature_count, Errc::invalid_parameter,
            "T primitive pairs per table");
    auto& tables = residue_tables_.emplace_back();
    for (const auto& p : slots) {
      p.validate();
      tables.emplace_back(p, s);
    }
  }
}

User User::generate(const SystemConfig& config, Rng& rng) {
  config.validate();
  std::vector<std::vector<Primitives>> prims(config.segments);
  for (auto& slots : prims) {
    for (const auto n : draw_moduli(config.signature_count, config.modulus_bits, rng)) {
      const std::uint64_t single[] = {n};
      slots.push_back({draw_multiplier(single, config.multiplier_bits, rng), n,
                       config.multiplier_bits, config.modulus_bits});
    }
  }
  return User(config, std::move(prims));
}

EnrolmentMessage User::enroll(const BitCode& record, std::uint64_t flip_seed) const {
  require(record.size() == config_.code_bits, Errc::invalid_record, "record length does not match D");
  const auto plan = config_.plan();
  Rng rng(flip_seed);
  const auto flips = draw_flip_positions(plan, rng);
  const std::size_t T = config_.signature_count;
  EnrolmentMessage msg;
  msg.segments = config_.segments;
  msg.signature_count = T;
  msg.signatures.reserve(config_.segments * 2 * T);
  for (std::size_t i = 0; i < config_.segments; ++i) {
    const auto variants =
        make_database_variants_at(record.slice(plan.offsets[i], plan.lengths[i]), flips[i]);
    for (const auto& v : variants.entries) {
      for (std::size_t t = 0; t < T; ++t) msg.signatures.push_back(residue_tables_[i][t](v));
    }
  }
  return msg;
}

void User::accept(const QueryKeyMessage& keys) {
  require(keys.query_multipliers.size() == config_.segments, Errc::protocol_error,
          "query keys for the wrong number of tables");
  for (const auto& slots : keys.query_multipliers) {
    require(slots.size() == config_.signature_count, Errc::protocol_error, "T query multipliers per table");
  }
  query_multipliers_ = keys.query_multipliers;
}

QueryMessage User::make_query(const BitCode& query, std::uint64_t query_id) const {
  require(query.size() == config_.code_bits, Errc::invalid_record, "query length does not match D");
  require(!query_multipliers_.empty(), Errc::protocol_error, "user has no query multipliers");
  const auto plan = config_.plan();
  const std::size_t T = config_.signature_count;
  QueryMessage msg;
  msg.query_id = query_id;
  msg.blinded.resize(config_.segments);
  for (std::size_t i = 0; i < config_.segments; ++i) {
    const auto variants = make_query_variants(query.slice(plan.offsets[i], plan.lengths[i]));
    auto& out = msg.blinded[i];
    out.reserve(variants.entries.size() * T);
    for (const auto& v : variants.entries) {
      for (std::size_t t = 0; t < T; ++t) {
        out.push_back(residue_tables_[i][t](v) * query_multipliers_[i][t]);
      }
    }
  }
  return msg;
}

PartyState User::state() const {
  PartyState s{Role::user, {Material::user_primitives}};
  if (!query_multipliers_.empty()) s.held.insert(Material::query_multipliers);
  return s;
}

// ---------------------------------------------------------------------------

DataOwner::DataOwner(const SystemConfig& config) : config_(config) { config_.validate(); }

DataOwner::DataOwner(const SystemConfig& config,
                     std::vector<std::vector<std::uint64_t>> server_moduli,
                     std::vector<std::vector<std::uint64_t>> owner_multipliers,
                     std::vector<std::vector<std::uint64_t>> query_inverses)
    : config_(config),
      server_moduli_(std::move(server_moduli)),
      owner_multipliers_(std::move(owner_multipliers)),
      query_inverses_(std::move(query_inverses)) {
  config_.validate();
  const std::size_t T = config_.signature_count;
  require(server_moduli_.size() == config_.segments && owner_multipliers_.size() == config_.segments &&
              query_inverses_.size() == config_.segments,
          Errc::invalid_parameter, "owner keys for the wrong number of tables");
  for (std::size_t i = 0; i < config_.segments; ++i) {
    require(server_moduli_[i].size() == T && owner_multipliers_[i].size() == T &&
                query_inverses_[i].size() == T * T,
            Errc::invalid_parameter, "owner keys have the wrong slot count");
  }
}

RegistrationResult DataOwner::register_server(const RegistrationRequest& request, Rng& rng) {
  const std::size_t T = config_.signature_count;
  require(request.moduli.size() == config_.segments, Errc::invalid_registration,
          "registration must list moduli for every table");
  const std::uint64_t limit = std::uint64_t{1} << config_.modulus_bits;
  for (const auto& slots : request.moduli) {
    require(slots.size() == T, Errc::invalid_registration, "T moduli per table");
    for (const auto n : slots) {
      require(n < limit && is_prime(n), Errc::invalid_registration,
              "server modulus " + std::to_string(n) + " is not a prime below 2^c_N");
    }
  }
  RegistrationResult result;
  server_moduli_ = request.moduli;
  owner_multipliers_.assign(config_.segments, {});
  query_inverses_.assign(config_.segments, {});
  result.for_user.query_multipliers.assign(config_.segments, {});
  result.for_server.server_multipliers.assign(config_.segments, {});
  for (std::size_t i = 0; i < config_.segments; ++i) {
    const auto& moduli = server_moduli_[i];
    for (std::size_t v = 0; v < T; ++v) {
      const std::uint64_t single[] = {moduli[v]};
      owner_multipliers_[i].push_back(draw_multiplier(single, config_.multiplier_bits, rng));
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto rq = draw_multiplier(moduli, config_.multiplier_bits, rng);
      result.for_user.query_multipliers[i].push_back(rq);
      for (std::size_t v = 0; v < T; ++v) {
        const auto inv = modular_inverse(rq, moduli[v]);
        query_inverses_[i].push_back(inv);
        result.for_server.server_multipliers[i].push_back(inv * owner_multipliers_[i][v] % moduli[v]);
      }
    }
  }
  return result;
}

IndexMessage DataOwner::make_index_entry(const EnrolmentMessage& msg, RecordId id) const {
  require(registered(), Errc::protocol_error, "no server registered");
  const std::size_t T = config_.signature_count;
  require(msg.segments == config_.segments && msg.signature_count == T &&
              msg.signatures.size() == config_.segments * 2 * T,
          Errc::protocol_error, "enrolment does not match the system configuration");
  IndexMessage out;
  out.record_id = id;
  out.keys.reserve(config_.segments * 2);
  std::vector<std::uint64_t> psi(T * T);
  for (std::size_t i = 0; i < config_.segments; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t t = 0; t < T; ++t) {
        const auto gamma = msg.at(i, j, t);
        for (std::size_t v = 0; v < T; ++v) {
          const auto n = server_moduli_[i][v];
          psi[t * T + v] = gamma % n * owner_multipliers_[i][v] % n;
        }
      }
      out.keys.push_back(make_bucket_key(psi, config_.modulus_bits));
    }
  }
  return out;
}

PartyState DataOwner::state() const {
  PartyState s{Role::data_owner, {}};
  if (!server_moduli_.empty()) s.held.insert(Material::server_moduli);
  if (!owner_multipliers_.empty()) s.held.insert(Material::owner_multipliers);
  if (!query_inverses_.empty()) s.held.insert(Material::query_inverses);
  return s;
}

// ---------------------------------------------------------------------------

Server::Server(const SystemConfig& config, std::vector<std::vector<std::uint64_t>> moduli)
    : config_(config), moduli_(std::move(moduli)) {
  config_.validate();
  require(moduli_.size() == config_.segments, Errc::invalid_parameter, "moduli for every table");
  reset_index();
}

Server Server::generate(const SystemConfig& config, Rng& rng) {
  config.validate();
  std::vector<std::vector<std::uint64_t>> moduli;
  for (std::size_t i = 0; i < config.segments; ++i) {
    moduli.push_back(draw_moduli(config.signature_count, config.modulus_bits, rng));
  }
  return Server(config, std::move(moduli));
}

RegistrationRequest Server::registration_request() const { return {moduli_}; }

void Server::accept(const ServerKeyMessage& keys) {
  require(keys.server_multipliers.size() == config_.segments, Errc::protocol_error,
          "server keys for the wrong number of tables");
  const std::size_t T = config_.signature_count;
  for (const auto& slots : keys.server_multipliers) {
    require(slots.size() == T * T, Errc::protocol_error, "T x T server multipliers per table");
  }
  server_multipliers_ = keys.server_multipliers;
}

void Server::reset_index() {
  IndexMetadata meta;
  meta.code_bits = static_cast<std::uint32_t>(config_.code_bits);
  meta.segments = static_cast<std::uint32_t>(config_.segments);
  meta.max_length = static_cast<std::uint32_t>(config_.max_length());
  meta.signature_count = static_cast<std::uint32_t>(config_.signature_count);
  meta.multiplier_bits = config_.multiplier_bits;
  meta.modulus_bits = config_.modulus_bits;
  index_ = SearchIndex(meta);
}

void Server::add(const IndexMessage& entry) {
  require(entry.keys.size() == config_.segments * 2, Errc::protocol_error,
          "index entry must carry two keys per table");
  for (std::size_t i = 0; i < config_.segments; ++i) {
    index_.insert(i, entry.keys[2 * i], entry.record_id);
    index_.insert(i, entry.keys[2 * i + 1], entry.record_id);
  }
  ++index_.metadata().record_count;
}

void Server::set_index(SearchIndex index) {
  const auto& meta = index.metadata();
  require(meta.code_bits == config_.code_bits && meta.segments == config_.segments &&
              meta.signature_count == config_.signature_count &&
              meta.modulus_bits == config_.modulus_bits,
          Errc::protocol_error, "index metadata does not match the server configuration");
  index_ = std::move(index);
}

RetrievalResult Server::search(const QueryMessage& query) const {
  require(registered(), Errc::protocol_error, "server is not registered");
  const auto plan = config_.plan();
  const std::size_t T = config_.signature_count;
  require(query.blinded.size() == config_.segments, Errc::protocol_error,
          "query must cover every table");

  // record -> (last table counted + 1, m); caps each table's contribution at one.
  std::unordered_map<RecordId, std::pair<std::size_t, std::size_t>> scratch;
  RetrievalResult result;
  result.query_id = query.query_id;
  std::vector<std::uint64_t> psi(T * T);
  for (std::size_t i = 0; i < config_.segments; ++i) {
    const auto& z = query.blinded[i];
    require(z.size() == plan.lengths[i] * T, Errc::protocol_error,
            "blinded values do not match the substring length");
    const auto& moduli = moduli_[i];
    const auto& rs = server_multipliers_[i];
    for (std::size_t k = 0; k < plan.lengths[i]; ++k) {
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t v = 0; v < T; ++v) {
          const auto n = moduli[v];
          psi[t * T + v] = z[k * T + t] % n * rs[t * T + v] % n;
        }
      }
      ++result.probes;
      const auto* bucket = index_.find(i, make_bucket_key(psi, config_.modulus_bits));
      if (bucket == nullptr) continue;
      for (const auto id : *bucket) {
        auto& [last, m] = scratch[id];
        if (last != i + 1) {
          last = i + 1;
          ++m;
        }
      }
    }
  }
  result.candidates.reserve(scratch.size());
  for (const auto& [id, entry] : scratch) result.candidates.push_back({id, entry.second});
  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return result;
}

PartyState Server::state() const {
  PartyState s{Role::server, {Material::server_moduli, Material::search_tables}};
  if (!server_multipliers_.empty()) s.held.insert(Material::server_multipliers);
  return s;
}

// ---------------------------------------------------------------------------

Registration setup_parties(const SystemConfig& config, Rng& rng) {
  auto user = User::generate(config, rng);
  auto server = Server::generate(config, rng);
  DataOwner owner(config);
  const auto keys = owner.register_server(server.registration_request(), rng);
  user.accept(keys.for_user);
  server.accept(keys.for_server);
  return {std::move(user), std::move(owner), std::move(server)};
}

void build_index(std::span<const EnrolmentMessage> enrolments, const DataOwner& owner,
                 Server& server, std::span<const RecordId> ids) {
  require(owner.registered() && server.registered(), Errc::protocol_error,
          "index generation requires a registered server");
  require(ids.empty() || ids.size() == enrolments.size(), Errc::invalid_parameter,
          "one id per enrolment");
  for (std::size_t n = 0; n < enrolments.size(); ++n) {
    const RecordId id = ids.empty() ? static_cast<RecordId>(n) : ids[n];
    server.add(owner.make_index_entry(enrolments[n], id));
  }
}

RetrievalResult query(const BitCode& q, const User& user, const Server& server,
                      std::span<const ChannelProfile> profiles, std::uint64_t query_id) {
  auto result = server.search(user.make_query(q, query_id));
  if (!profiles.empty()) result.ranks = rank_ordered_search(result, profiles);
  return result;
}

std::vector<std::vector<RecordId>> rank_ordered_search(const RetrievalResult& result,
                                                       std::span<const ChannelProfile> profiles) {
  std::vector<ChannelProfile> sorted(profiles.begin(), profiles.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ChannelProfile& a, const ChannelProfile& b) { return a.radius < b.radius; });
  for (std::size_t g = 1; g < sorted.size(); ++g) {
    require(sorted[g].radius > sorted[g - 1].radius && sorted[g].mu < sorted[g - 1].mu,
            Errc::invalid_profiles, "profiles need increasing radii with strictly decreasing mu");
  }
  std::vector<Candidate> ordered = result.candidates;
  std::sort(ordered.begin(), ordered.end(), [](const Candidate& a, const Candidate& b) {
    return a.m != b.m ? a.m > b.m : a.id < b.id;
  });
  std::vector<std::vector<RecordId>> ranks(sorted.size());
  for (const auto& c : ordered) {
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      if (decide(c.m, sorted[g])) {
        ranks[g].push_back(c.id);
        break;
      }
    }
  }
  return ranks;
}

std::vector<RecordId> knn(std::vector<Candidate> candidates, std::size_t k) {
  require(k >= 1, Errc::invalid_parameter, "k must be >= 1");
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.m != b.m ? a.m > b.m : a.id < b.id;
  });
  std::vector<RecordId> out;
  for (std::size_t n = 0; n < std::min(k, candidates.size()); ++n) out.push_back(candidates[n].id);
  return out;
}

std::vector<RecordId> knn(const RetrievalResult& result, std::size_t k) {
  return knn(result.candidates, k);
}

}  // namespace mimp
