#include "dosm/common.hpp"

namespace dosm {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Rng make_stream(std::uint64_t master_seed, std::string_view name) {
  const std::uint64_t tag = fnv1a64(name);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

std::vector<Rng> make_node_streams(std::uint64_t master_seed, std::string_view prefix,
                                   std::size_t n) {
  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    streams.push_back(make_stream(master_seed, std::string(prefix) + "." + std::to_string(i)));
  }
  return streams;
}

}  // namespace dosm
