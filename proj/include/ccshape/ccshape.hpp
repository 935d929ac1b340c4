#pragma once

#include "ccshape/errors.hpp"
#include "ccshape/shape_core.hpp"
#include "ccshape/hessian.hpp"
#include "ccshape/lbfgs.hpp"
#include "ccshape/fingerprint.hpp"
#include "ccshape/cc_solver.hpp"
#include "ccshape/predicates.hpp"
#include "ccshape/delaunay.hpp"
#include "ccshape/structure_analysis.hpp"
#include "ccshape/csv_io.hpp"
#include "ccshape/run_config.hpp"
#include "ccshape/catalog.hpp"
#include "ccshape/svg_render.hpp"
