#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace subcoda {

/// Discretized inter-click interval. Values live in [0, alphabet_size);
/// the largest value marks the end of a coda.
using Symbol = std::uint16_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace subcoda
