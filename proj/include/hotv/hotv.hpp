#pragma once

#include "approxlab.hpp"
#include "config.hpp"
#include "density.hpp"
#include "diagnostics.hpp"
#include "dual.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "pgm.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "stencil.hpp"
#include "summation.hpp"
#include "tensor.hpp"
