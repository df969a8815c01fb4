#pragma once

#include "dduc/config.hpp"
#include "dduc/error.hpp"
#include "dduc/forecast.hpp"
#include "dduc/grid.hpp"
#include "dduc/ocba.hpp"
#include "dduc/opsel.hpp"
#include "dduc/report.hpp"
#include "dduc/rng.hpp"
#include "dduc/solver/lp.hpp"
#include "dduc/solver/lp_writer.hpp"
#include "dduc/solver/lshaped.hpp"
#include "dduc/solver/milp.hpp"
#include "dduc/studies.hpp"
#include "dduc/suc.hpp"
#include "dduc/synthetic.hpp"
