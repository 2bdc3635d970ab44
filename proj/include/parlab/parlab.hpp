#pragma once

// Umbrella header for the parlab library.

#include "parlab/assemble.hpp"
#include "parlab/coefficients.hpp"
#include "parlab/config.hpp"
#include "parlab/csv.hpp"
#include "parlab/errors.hpp"
#include "parlab/eternal.hpp"
#include "parlab/evolution.hpp"
#include "parlab/expr.hpp"
#include "parlab/grid.hpp"
#include "parlab/inhomogeneous.hpp"
#include "parlab/linear_solver.hpp"
#include "parlab/norms.hpp"
#include "parlab/rng.hpp"
#include "parlab/runner.hpp"
#include "parlab/verify.hpp"
