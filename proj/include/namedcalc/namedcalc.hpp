#pragma once

// Engine umbrella header.  The HTTP service lives in namedcalc/server.hpp.

#include "namedcalc/error.hpp"
#include "namedcalc/evaluate.hpp"
#include "namedcalc/numeric.hpp"
#include "namedcalc/program.hpp"
#include "namedcalc/scalar.hpp"
#include "namedcalc/symbolic.hpp"
#include "namedcalc/units.hpp"
#include "namedcalc/worksheet.hpp"
