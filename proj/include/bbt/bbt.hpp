#pragma once

// Umbrella header for the hierarchical Bayesian Bradley-Terry toolkit.

#include "bbt/diagnostics.hpp"
#include "bbt/errors.hpp"
#include "bbt/game_log.hpp"
#include "bbt/generalized_logistic.hpp"
#include "bbt/inference.hpp"
#include "bbt/io_util.hpp"
#include "bbt/predict.hpp"
#include "bbt/rng.hpp"
#include "bbt/sampler.hpp"
#include "bbt/special_functions.hpp"
#include "bbt/strengths.hpp"
#include "bbt/summary.hpp"
#include "bbt/synthetic.hpp"
#include "bbt/team_index.hpp"
#include "bbt/version.hpp"
#include "bbt/win_matrix.hpp"
