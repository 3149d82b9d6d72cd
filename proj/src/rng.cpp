#include "argan/rng.hpp"

#include <ATen/CPUGeneratorImpl.h>

namespace argan {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view purpose,
                       std::uint64_t a, std::uint64_t b) {
  // FNV-1a over the purpose tag, then splitmix over the numeric parts.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  std::uint64_t x = splitmix64(seed ^ h);
  x = splitmix64(x ^ a);
  x = splitmix64(x ^ (b + 0x632BE59BD9B4E019ull));
  return x;
}

at::Generator make_generator(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

}  // namespace argan
