#pragma once

#include <cstdint>
#include <string_view>

namespace tollcast {

/// Named sub-seed: a stable function of (base seed, purpose name, index).
/// Every random stream in the pipeline comes from one of these.
std::uint64_t derive_seed(std::uint64_t base, std::string_view name, std::uint64_t index = 0);

}  // namespace tollcast
