#pragma once

#include "pinchopt/assignment.hpp"
#include "pinchopt/bandit_policy.hpp"
#include "pinchopt/baselines.hpp"
#include "pinchopt/beamforming.hpp"
#include "pinchopt/channel.hpp"
#include "pinchopt/discrete_placement.hpp"
#include "pinchopt/error.hpp"
#include "pinchopt/evaluation.hpp"
#include "pinchopt/experiment.hpp"
#include "pinchopt/geometry.hpp"
#include "pinchopt/mlp.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/scenario.hpp"
#include "pinchopt/types.hpp"
#include "pinchopt/wmmse.hpp"
