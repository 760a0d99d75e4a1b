#include "mimp/persistence.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mimp/error.hpp"
#include "mimp/text_format.hpp"

namespace mimp {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  require(in.gcount() == 4, Errc::corrupt_index, "truncated index file");
  return std::uint32_t{buf[0]} | std::uint32_t{buf[1]} << 8 | std::uint32_t{buf[2]} << 16 |
         std::uint32_t{buf[3]} << 24;
}

std::uint32_t narrow(std::size_t v) {
  require(v <= 0xFFFFFFFFU, Errc::invalid_parameter, "value does not fit the index format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_index(std::ostream& out, const SearchIndex& index) {
  out.write(kIndexMagic, 8);
  const auto& m = index.metadata();
  for (const auto v : {m.code_bits, m.segments, m.max_length, m.signature_count, m.multiplier_bits,
                       m.modulus_bits, m.record_count}) {
    put_u32(out, v);
  }
  require(index.tables().size() == m.segments, Errc::invalid_parameter,
          "index table count does not match metadata");
  for (const auto& table : index.tables()) {
    std::vector<const HashTable::value_type*> entries;
    entries.reserve(table.size());
    for (const auto& e : table) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
    put_u32(out, narrow(entries.size()));
    for (const auto* e : entries) {
      put_u32(out, narrow(e->first.size()));
      out.write(e->first.data(), static_cast<std::streamsize>(e->first.size()));
      put_u32(out, narrow(e->second.size()));
      for (const auto id : e->second) put_u32(out, id);
    }
  }
}

SearchIndex read_index(std::istream& in) {
  char magic[8] = {};
  in.read(magic, 8);
  require(in.gcount() == 8 && std::memcmp(magic, kIndexMagic, 8) == 0, Errc::corrupt_index,
          "bad index magic (expected MIMPIDX1)");
  IndexMetadata meta;
  meta.code_bits = get_u32(in);
  meta.segments = get_u32(in);
  meta.max_length = get_u32(in);
  meta.signature_count = get_u32(in);
  meta.multiplier_bits = get_u32(in);
  meta.modulus_bits = get_u32(in);
  meta.record_count = get_u32(in);
  require(meta.segments >= 1 && meta.segments <= meta.code_bits && meta.signature_count >= 1 &&
              meta.modulus_bits >= 2 && meta.modulus_bits <= kMaxModulusBits,
          Errc::corrupt_index, "implausible index header");
  const std::size_t key_len = meta.signature_count * meta.signature_count * ((meta.modulus_bits + 7) / 8);
  SearchIndex index(meta);
  std::string key(key_len, '\0');
  for (std::size_t t = 0; t < meta.segments; ++t) {
    const auto buckets = get_u32(in);
    std::string previous;
    for (std::uint32_t b = 0; b < buckets; ++b) {
      require(get_u32(in) == key_len, Errc::corrupt_index, "bucket key has the wrong length");
      in.read(key.data(), static_cast<std::streamsize>(key_len));
      require(static_cast<std::size_t>(in.gcount()) == key_len, Errc::corrupt_index,
              "truncated index file");
      require(b == 0 || previous < key, Errc::corrupt_index, "bucket keys out of order");
      previous = key;
      const auto ids = get_u32(in);
      require(ids >= 1, Errc::corrupt_index, "empty bucket");
      for (std::uint32_t k = 0; k < ids; ++k) {
        const auto id = get_u32(in);
        require(index.insert(t, key, id), Errc::corrupt_index, "duplicate id in bucket");
      }
    }
  }
  require(in.peek() == std::char_traits<char>::eof(), Errc::corrupt_index,
          "trailing bytes after index");
  return index;
}

void save_index(const SearchIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::stage_error, "cannot open '" + path + "' for writing");
  write_index(out, index);
  out.flush();
  require(static_cast<bool>(out), Errc::stage_error, "write failed for '" + path + "'");
}

SearchIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::stage_error, "cannot open index '" + path + "'");
  return read_index(in);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kKeystoreMagic = "MIMPKEYS1";

std::string_view role_name(Role role) {
  switch (role) {
    case Role::user: return "user";
    case Role::data_owner: return "owner";
    case Role::server: return "server";
  }
  return "?";
}

Role parse_role(const std::string& name) {
  if (name == "user") return Role::user;
  if (name == "owner") return Role::data_owner;
  if (name == "server") return Role::server;
  fail(Errc::stage_error, "unknown keystore role '" + name + "'");
}

std::vector<std::uint64_t> flatten(const std::vector<Primitives>& prims, bool moduli) {
  std::vector<std::uint64_t> out;
  for (const auto& p : prims) out.push_back(moduli ? p.modulus : p.multiplier);
  return out;
}

const std::vector<std::vector<std::uint64_t>>& field(const Keystore& store, std::size_t f,
                                                      Role role) {
  require(store.role == role, Errc::stage_error,
          "keystore holds " + std::string(role_name(store.role)) + " keys, expected " +
              std::string(role_name(role)));
  require(f < store.fields.size(), Errc::stage_error, "keystore field missing");
  return store.fields[f];
}

}  // namespace

std::vector<std::string> keystore_fields(Role role) {
  switch (role) {
    case Role::user: return {"N_u", "R_u", "R_q"};
    case Role::data_owner: return {"N_s", "R_o", "Rinv_q"};
    case Role::server: return {"N_s", "R_s"};
  }
  return {};
}

void write_keystore(std::ostream& out, const Keystore& store) {
  const auto& c = store.config;
  out << kKeystoreMagic << '\n'
      << "role=" << role_name(store.role) << '\n'
      << "D=" << c.code_bits << '\n'
      << "L=" << c.segments << '\n'
      << "T=" << c.signature_count << '\n'
      << "c_R=" << c.multiplier_bits << '\n'
      << "c_N=" << c.modulus_bits << '\n'
      << "seed=" << store.seed << '\n';
  const auto names = keystore_fields(store.role);
  require(store.fields.size() == names.size(), Errc::invalid_parameter, "keystore field count");
  for (std::size_t i = 0; i < c.segments; ++i) {
    out << "table=" << i;
    for (std::size_t f = 0; f < names.size(); ++f) {
      out << ' ' << names[f] << '=' << join_u64(store.fields[f].at(i));
    }
    out << '\n';
  }
}

Keystore read_keystore(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && line == kKeystoreMagic, Errc::stage_error,
          "bad keystore magic (expected MIMPKEYS1)");
  KeyValues header;
  for (int n = 0; n < 7 && std::getline(in, line); ++n) header.insert(split_key_value(line));
  Keystore store;
  store.role = parse_role(get_string(header, "role"));
  store.config.code_bits = get_size(header, "D");
  store.config.segments = get_size(header, "L");
  store.config.signature_count = get_size(header, "T");
  store.config.multiplier_bits = static_cast<unsigned>(get_u64(header, "c_R"));
  store.config.modulus_bits = static_cast<unsigned>(get_u64(header, "c_N"));
  store.seed = get_u64(header, "seed");
  try {
    store.config.validate();
  } catch (const Error& e) {
    fail(Errc::stage_error, std::string("keystore config: ") + e.what());
  }
  const auto names = keystore_fields(store.role);
  store.fields.assign(names.size(), {});
  for (std::size_t i = 0; i < store.config.segments; ++i) {
    require(static_cast<bool>(std::getline(in, line)), Errc::stage_error,
            "keystore truncated at table " + std::to_string(i));
    std::istringstream tokens(line);
    std::string token;
    KeyValues kv;
    while (tokens >> token) kv.insert(split_key_value(token));
    require(get_size(kv, "table") == i, Errc::stage_error, "keystore tables out of order");
    for (std::size_t f = 0; f < names.size(); ++f) {
      store.fields[f].push_back(parse_u64_list(get_string(kv, names[f])));
    }
  }
  return store;
}

Keystore export_keystore(const User& user, std::uint64_t seed) {
  Keystore store{Role::user, user.config(), seed, {{}, {}, user.query_multipliers()}};
  for (const auto& slots : user.primitives()) {
    store.fields[0].push_back(flatten(slots, true));
    store.fields[1].push_back(flatten(slots, false));
  }
  return store;
}

Keystore export_keystore(const DataOwner& owner, std::uint64_t seed) {
  return {Role::data_owner, owner.config(), seed,
          {owner.server_moduli(), owner.owner_multipliers(), owner.query_inverses()}};
}

Keystore export_keystore(const Server& server, std::uint64_t seed) {
  return {Role::server, server.config(), seed, {server.moduli(), server.server_multipliers()}};
}

User import_user(const Keystore& store) {
  const auto& moduli = field(store, 0, Role::user);
  const auto& multipliers = field(store, 1, Role::user);
  const auto& c = store.config;
  std::vector<std::vector<Primitives>> prims(c.segments);
  for (std::size_t i = 0; i < c.segments; ++i) {
    require(moduli[i].size() == c.signature_count && multipliers[i].size() == c.signature_count,
            Errc::stage_error, "user keystore needs T primitive pairs per table");
    for (std::size_t t = 0; t < c.signature_count; ++t) {
      prims[i].push_back({multipliers[i][t], moduli[i][t], c.multiplier_bits, c.modulus_bits});
    }
  }
  User user(c, std::move(prims));
  if (!field(store, 2, Role::user).front().empty()) user.accept({store.fields[2]});
  return user;
}

DataOwner import_owner(const Keystore& store) {
  return DataOwner(store.config, field(store, 0, Role::data_owner), field(store, 1, Role::data_owner),
                   field(store, 2, Role::data_owner));
}

Server import_server(const Keystore& store) {
  Server server(store.config, field(store, 0, Role::server));
  if (!field(store, 1, Role::server).front().empty()) server.accept({store.fields[1]});
  return server;
}

}  // namespace mimp
