#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rcasim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the random stream owned by (job, purpose). Streams are keyed
/// independently so editing one job never shifts another job's draws.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t job, std::string_view purpose) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(base ^ 0x5851f42d4c957f2dULL) ^ splitmix64(job + 0x14057b7ef767814fULL) ^ h);
}

inline std::mt19937_64 make_stream(std::uint64_t base, std::uint64_t job, std::string_view purpose) {
  return std::mt19937_64(stream_seed(base, job, purpose));
}

}  // namespace rcasim
