#pragma once

#include <cstdint>
#include <string_view>

#include <ATen/core/Generator.h>

namespace argan {

// Every random draw in the library is taken from a generator derived from a
// (seed, purpose, index...) tuple, so a training run can resume at any
// iteration without persisting generator state.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view purpose,
                       std::uint64_t a = 0, std::uint64_t b = 0);

at::Generator make_generator(std::uint64_t seed);

inline at::Generator stream(std::uint64_t seed, std::string_view purpose,
                            std::uint64_t a = 0, std::uint64_t b = 0) {
  return make_generator(mix_seed(seed, purpose, a, b));
}

}  // namespace argan
