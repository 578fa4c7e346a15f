#pragma once

#include "fsislip/common.hpp"
#include "fsislip/geometry.hpp"
#include "fsislip/quadrature.hpp"
#include "fsislip/jet.hpp"
#include "fsislip/transform.hpp"
#include "fsislip/operators.hpp"
#include "fsislip/solver.hpp"
#include "fsislip/measures.hpp"
#include "fsislip/fixed_point.hpp"
#include "fsislip/diagnostics.hpp"
#include "fsislip/io.hpp"
