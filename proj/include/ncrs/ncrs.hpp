#pragma once

#include "ncrs/algorithms.hpp"
#include "ncrs/config.hpp"
#include "ncrs/diagnostics.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/harness.hpp"
#include "ncrs/links.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/scaling.hpp"
#include "ncrs/schedule.hpp"
#include "ncrs/subspace.hpp"
#include "ncrs/suite.hpp"
#include "ncrs/trajectory.hpp"
#include "ncrs/vec.hpp"
#include "ncrs/vote_params.hpp"
