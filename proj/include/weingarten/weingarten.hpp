// Umbrella header.
#pragma once

#include "weingarten/classify.hpp"
#include "weingarten/dual.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/expr.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/linearcmp.hpp"
#include "weingarten/phasespace.hpp"
#include "weingarten/quadrature.hpp"
#include "weingarten/relation.hpp"
#include "weingarten/roots.hpp"
