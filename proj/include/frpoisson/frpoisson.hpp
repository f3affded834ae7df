#pragma once

// Umbrella header.

#include "analysis.hpp"
#include "assembly.hpp"
#include "boundary.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "frlap_kernel.hpp"
#include "lattice.hpp"
#include "problems.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "specfun.hpp"
