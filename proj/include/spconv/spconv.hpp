// Umbrella header.

#pragma once

#include "spconv/analysis.hpp"
#include "spconv/bench.hpp"
#include "spconv/conv.hpp"
#include "spconv/grid.hpp"
#include "spconv/reference.hpp"
#include "spconv/rng.hpp"
#include "spconv/sparse.hpp"
#include "spconv/verify.hpp"
