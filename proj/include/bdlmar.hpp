#pragma once

#include "bdlmar/ar_dynamics.hpp"
#include "bdlmar/baselines.hpp"
#include "bdlmar/core_types.hpp"
#include "bdlmar/diagnostics.hpp"
#include "bdlmar/errors.hpp"
#include "bdlmar/io.hpp"
#include "bdlmar/mcmc.hpp"
#include "bdlmar/posterior.hpp"
#include "bdlmar/prior_precision.hpp"
#include "bdlmar/rng.hpp"
#include "bdlmar/simulation.hpp"
