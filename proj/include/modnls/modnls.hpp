#pragma once

#include "modnls/common.hpp"
#include "modnls/fft.hpp"
#include "modnls/lattice.hpp"
#include "modnls/modulation.hpp"
#include "modnls/spectral.hpp"
#include "modnls/variation.hpp"
#include "modnls/solver.hpp"
#include "modnls/bench.hpp"
#include "modnls/io.hpp"

namespace modnls {

inline constexpr const char* version = "0.1.0";

}  // namespace modnls
