#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace s2cgan {

using Engine = std::mt19937_64;

// Counter-based seeding: each (base, stream ids...) tuple maps to an
// independent engine, so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> streams);

inline Engine make_engine(std::uint64_t base, std::initializer_list<std::uint64_t> streams) {
  return Engine(derive_seed(base, streams));
}

// FNV-1a over bytes; used for config hashes embedded in artifacts.
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace s2cgan
