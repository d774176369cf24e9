#pragma once

// Umbrella header: the whole dependent-rounding toolkit in one include.

#include "bench.hpp"
#include "coverage.hpp"
#include "instances.hpp"
#include "lp.hpp"
#include "lp_io.hpp"
#include "mip.hpp"
#include "parallel.hpp"
#include "ptas.hpp"
#include "rng.hpp"
#include "rounding.hpp"
#include "routing.hpp"
#include "tolerances.hpp"
