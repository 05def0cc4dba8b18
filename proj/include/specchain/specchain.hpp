#pragma once

#include "specchain/chain.hpp"
#include "specchain/errors.hpp"
#include "specchain/graph.hpp"
#include "specchain/io.hpp"
#include "specchain/metrics.hpp"
#include "specchain/proposals.hpp"
#include "specchain/rng.hpp"
#include "specchain/spectral.hpp"

namespace specchain {
inline constexpr const char* version = "0.1.0";
}
