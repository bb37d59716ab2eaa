#pragma once

#include "gwbounds/config.hpp"
#include "gwbounds/curve.hpp"
#include "gwbounds/entropy_power.hpp"
#include "gwbounds/error.hpp"
#include "gwbounds/gw_bounds.hpp"
#include "gwbounds/numeric.hpp"
#include "gwbounds/quadrature.hpp"
#include "gwbounds/scalar_rd.hpp"
#include "gwbounds/source_models.hpp"
#include "gwbounds/oracle/allocation_grid.hpp"
#include "gwbounds/oracle/blahut_arimoto.hpp"
#include "gwbounds/oracle/frontier.hpp"
#include "gwbounds/oracle/monte_carlo.hpp"
#include "gwbounds/oracle/parallel.hpp"
#include "gwbounds/oracle/quantize.hpp"
#include "gwbounds/oracle/report.hpp"
#include "gwbounds/oracle/rng.hpp"
