#pragma once

#include "ntknas/activations.hpp"
#include "ntknas/architecture.hpp"
#include "ntknas/bounds.hpp"
#include "ntknas/data.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/gauss.hpp"
#include "ntknas/kernel.hpp"
#include "ntknas/network.hpp"
#include "ntknas/parallel.hpp"
#include "ntknas/quadrature.hpp"
#include "ntknas/ranking.hpp"
#include "ntknas/search.hpp"
#include "ntknas/serialize.hpp"
#include "ntknas/training.hpp"

namespace ntknas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ntknas
