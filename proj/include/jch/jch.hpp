#pragma once

#include "jch/chain_model.hpp"
#include "jch/commands.hpp"
#include "jch/config.hpp"
#include "jch/csv.hpp"
#include "jch/density_matrix.hpp"
#include "jch/evolution.hpp"
#include "jch/experiments.hpp"
#include "jch/mode_algebra.hpp"
#include "jch/superoperator.hpp"
