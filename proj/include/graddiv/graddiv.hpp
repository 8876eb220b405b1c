#pragma once

// Convenience header pulling in the whole library.

#include "graddiv/mac_grid.hpp"
#include "graddiv/graddiv_operator.hpp"
#include "graddiv/linear_solvers.hpp"
#include "graddiv/time_schemes.hpp"
#include "graddiv/stability_monitor.hpp"
#include "graddiv/mms.hpp"
#include "graddiv/bench.hpp"
