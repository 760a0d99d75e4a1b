#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mimp/bitcode.hpp"
#include "mimp/calibration.hpp"
#include "mimp/mimp_core.hpp"
#include "mimp/montgomery.hpp"

namespace mimp {

using RecordId = std::uint32_t;

struct SystemConfig {
  std::size_t code_bits = 0;        // D
  std::size_t segments = 0;         // L
  std::size_t signature_count = 2;  // T
  unsigned multiplier_bits = 15;    // c_R
  unsigned modulus_bits = 15;       // c_N

  [[nodiscard]] SegmentationPlan plan() const { return SegmentationPlan::make(code_bits, segments); }
  [[nodiscard]] std::size_t max_length() const { return plan().max_length(); }
  void validate() const;
  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// ---------------------------------------------------------------------------
// Messages. Every value that crosses a party boundary is one of these.

// User -> data owner. signatures[(table * 2 + variant) * T + t].
struct EnrolmentMessage {
  std::size_t segments = 0;
  std::size_t signature_count = 0;
  std::vector<std::uint64_t> signatures;

  [[nodiscard]] std::uint64_t at(std::size_t table, std::size_t variant, std::size_t t) const {
    return signatures[(table * 2 + variant) * signature_count + t];
  }
  friend bool operator==(const EnrolmentMessage&, const EnrolmentMessage&) = default;
};

// Server -> data owner: T moduli per table.
struct RegistrationRequest {
  std::vector<std::vector<std::uint64_t>> moduli;
};

// Data owner -> user: R_q per table and user slot.
struct QueryKeyMessage {
  std::vector<std::vector<std::uint64_t>> query_multipliers;
};

// Data owner -> server: R_s per table, [t * T + v].
struct ServerKeyMessage {
  std::vector<std::vector<std::uint64_t>> server_multipliers;
};

// Data owner -> server. keys[table * 2 + variant] is the serialized nested
// signature of that database variant.
struct IndexMessage {
  RecordId record_id = 0;
  std::vector<std::string> keys;
};

// User -> server. For table i, blinded[i] holds len_i * T values, variant-major.
struct QueryMessage {
  std::uint64_t query_id = 0;
  std::vector<std::vector<std::uint64_t>> blinded;
  friend bool operator==(const QueryMessage&, const QueryMessage&) = default;
};

std::string encode(const EnrolmentMessage& msg);
EnrolmentMessage decode_enrolment(std::string_view bytes);
std::string encode(const QueryMessage& msg);
QueryMessage decode_query(std::string_view bytes);

// ---------------------------------------------------------------------------
// Party isolation bookkeeping.

enum class Role { user, data_owner, server };

enum class Material {
  plaintext_code,
  user_primitives,     // (R_u, N_u)
  query_multipliers,   // R_q
  owner_multipliers,   // R_o
  query_inverses,      // R'_q
  server_moduli,       // N_s
  server_multipliers,  // R_s
  search_tables,
};

struct PartyState {
  Role role = Role::user;
  std::set<Material> held;
};

// True when the state holds nothing outside its role's partition.
bool audit_party_isolation(const PartyState& state);

// ---------------------------------------------------------------------------

struct IndexMetadata {
  std::uint32_t code_bits = 0;
  std::uint32_t segments = 0;
  std::uint32_t max_length = 0;
  std::uint32_t signature_count = 0;
  std::uint32_t multiplier_bits = 0;
  std::uint32_t modulus_bits = 0;
  std::uint32_t record_count = 0;
  friend bool operator==(const IndexMetadata&, const IndexMetadata&) = default;
};

using Bucket = std::vector<RecordId>;
using HashTable = std::unordered_map<std::string, Bucket>;

// L hash tables mapping nested-signature keys to record ids.
class SearchIndex {
 public:
  SearchIndex() = default;
  explicit SearchIndex(const IndexMetadata& meta);

  // Appends `id` to the bucket unless already present. Returns true if added.
  bool insert(std::size_t table, const std::string& key, RecordId id);
  [[nodiscard]] const Bucket* find(std::size_t table, const std::string& key) const;

  [[nodiscard]] const IndexMetadata& metadata() const noexcept { return meta_; }
  IndexMetadata& metadata() noexcept { return meta_; }
  [[nodiscard]] const std::vector<HashTable>& tables() const noexcept { return tables_; }
  [[nodiscard]] std::size_t key_count() const noexcept;

  friend bool operator==(const SearchIndex& a, const SearchIndex& b) {
    return a.meta_ == b.meta_ && a.tables_ == b.tables_;
  }

 private:
  IndexMetadata meta_;
  std::vector<HashTable> tables_;
};

// Residues in (t, v) order, each as ceil(c_N / 8) little-endian bytes.
std::string make_bucket_key(std::span<const std::uint64_t> residues, unsigned modulus_bits);

struct Candidate {
  RecordId id = 0;
  std::size_t m = 0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct RetrievalResult {
  std::uint64_t query_id = 0;
  std::vector<Candidate> candidates;  // m >= 1, sorted by id
  std::vector<std::vector<RecordId>> ranks;
  std::size_t probes = 0;
};

// ---------------------------------------------------------------------------

class User {
 public:
  User(const SystemConfig& config, std::vector<std::vector<Primitives>> primitives);
  // Draws T distinct moduli and coprime multipliers per table.
  static User generate(const SystemConfig& config, Rng& rng);

  // Flip positions come from an rng seeded with flip_seed, one per table, so
  // the same seed reproduces obfuscated_distance(record, ., L, Rng(flip_seed)).
  [[nodiscard]] EnrolmentMessage enroll(const BitCode& record, std::uint64_t flip_seed) const;
  void accept(const QueryKeyMessage& keys);
  [[nodiscard]] QueryMessage make_query(const BitCode& query, std::uint64_t query_id) const;

  [[nodiscard]] PartyState state() const;
  [[nodiscard]] const SystemConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<std::vector<Primitives>>& primitives() const noexcept {
    return primitives_;
  }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& query_multipliers() const noexcept {
    return query_multipliers_;
  }

 private:
  SystemConfig config_;
  std::vector<std::vector<Primitives>> primitives_;
  std::vector<std::vector<std::uint64_t>> query_multipliers_;
  std::vector<std::vector<BitResidueTable>> residue_tables_;
};

struct RegistrationResult {
  QueryKeyMessage for_user;
  ServerKeyMessage for_server;
};

class DataOwner {
 public:
  explicit DataOwner(const SystemConfig& config);
  DataOwner(const SystemConfig& config, std::vector<std::vector<std::uint64_t>> server_moduli,
            std::vector<std::vector<std::uint64_t>> owner_multipliers,
            std::vector<std::vector<std::uint64_t>> query_inverses);

  // Throws invalid_registration for composite or out-of-range moduli.
  RegistrationResult register_server(const RegistrationRequest& request, Rng& rng);
  [[nodiscard]] bool registered() const noexcept { return !server_moduli_.empty(); }

  [[nodiscard]] IndexMessage make_index_entry(const EnrolmentMessage& msg, RecordId id) const;

  [[nodiscard]] PartyState state() const;
  [[nodiscard]] const SystemConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& server_moduli() const noexcept {
    return server_moduli_;
  }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& owner_multipliers() const noexcept {
    return owner_multipliers_;
  }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& query_inverses() const noexcept {
    return query_inverses_;
  }

 private:
  SystemConfig config_;
  std::vector<std::vector<std::uint64_t>> server_moduli_;
  std::vector<std::vector<std::uint64_t>> owner_multipliers_;
  std::vector<std::vector<std::uint64_t>> query_inverses_;
};

class Server {
 public:
  Server(const SystemConfig& config, std::vector<std::vector<std::uint64_t>> moduli);
  static Server generate(const SystemConfig& config, Rng& rng);

  [[nodiscard]] RegistrationRequest registration_request() const;
  void accept(const ServerKeyMessage& keys);
  [[nodiscard]] bool registered() const noexcept { return !server_multipliers_.empty(); }

  void reset_index();
  void add(const IndexMessage& entry);
  void set_index(SearchIndex index);
  [[nodiscard]] const SearchIndex& index() const noexcept { return index_; }

  // Probes every table with every blinded variant and accumulates, per record,
  // the number of tables with at least one bucket hit.
  [[nodiscard]] RetrievalResult search(const QueryMessage& query) const;

  [[nodiscard]] PartyState state() const;
  [[nodiscard]] const SystemConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& moduli() const noexcept {
    return moduli_;
  }
  [[nodiscard]] const std::vector<std::vector<std::uint64_t>>& server_multipliers() const noexcept {
    return server_multipliers_;
  }

 private:
  SystemConfig config_;
  std::vector<std::vector<std::uint64_t>> moduli_;
  std::vector<std::vector<std::uint64_t>> server_multipliers_;
  SearchIndex index_;
};

// ---------------------------------------------------------------------------
// Protocol-level operations.

struct Registration {
  User user;
  DataOwner owner;
  Server server;
};

// Runs key generation and server registration for all three parties.
Registration setup_parties(const SystemConfig& config, Rng& rng);

// Owner maps each enrolment into the server domain; server stores the keys.
// Record i of `enrolments` gets id ids[i] (or i when ids is empty).
void build_index(std::span<const EnrolmentMessage> enrolments, const DataOwner& owner,
                 Server& server, std::span<const RecordId> ids = {});

// Full query round trip; ranks are filled when profiles are given.
RetrievalResult query(const BitCode& q, const User& user, const Server& server,
                      std::span<const ChannelProfile> profiles = {}, std::uint64_t query_id = 0);

// Rank 1 = {m >= mu_1}; rank g = {mu_g <= m < mu_(g-1)}. Profiles sorted by
// increasing radius must have strictly decreasing mu.
std::vector<std::vector<RecordId>> rank_ordered_search(const RetrievalResult& result,
                                                       std::span<const ChannelProfile> profiles);

// Top k by m descending, ties by ascending id.
std::vector<RecordId> knn(const RetrievalResult& result, std::size_t k);
std::vector<RecordId> knn(std::vector<Candidate> candidates, std::size_t k);

}  // namespace mimp
