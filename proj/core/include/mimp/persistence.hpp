#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mimp/protocol.hpp"

namespace mimp {

// Index file: "MIMPIDX1", little-endian u32 header (D, L, s, T, c_R, c_N,
// n_records), then per table a bucket count followed by
// (key_len, key_bytes, id_count, ids) entries sorted by key.
inline constexpr char kIndexMagic[] = "MIMPIDX1";

void write_index(std::ostream& out, const SearchIndex& index);
SearchIndex read_index(std::istream& in);
void save_index(const SearchIndex& index, const std::string& path);
SearchIndex load_index(const std::string& path);

// Keystores are key=value text, one per party. Only the role's own material
// is written, so a keystore file is itself a party boundary.
struct Keystore {
  Role role = Role::user;
  SystemConfig config;
  std::uint64_t seed = 0;
  // user: N_u, R_u, R_q. owner: N_s, R_o, Rinv_q. server: N_s, R_s.
  std::vector<std::vector<std::vector<std::uint64_t>>> fields;  // [field][table][slot]
};

std::vector<std::string> keystore_fields(Role role);

void write_keystore(std::ostream& out, const Keystore& store);
Keystore read_keystore(std::istream& in);

Keystore export_keystore(const User& user, std::uint64_t seed);
Keystore export_keystore(const DataOwner& owner, std::uint64_t seed);
Keystore export_keystore(const Server& server, std::uint64_t seed);
User import_user(const Keystore& store);
DataOwner import_owner(const Keystore& store);
Server import_server(const Keystore& store);

}  // namespace mimp
