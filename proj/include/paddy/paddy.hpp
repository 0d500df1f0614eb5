#pragma once

// Umbrella header for the paddy optimization library.

#include "paddy/bench.hpp"
#include "paddy/engine.hpp"
#include "paddy/errors.hpp"
#include "paddy/objectives.hpp"
#include "paddy/param_space.hpp"
#include "paddy/rng.hpp"
#include "paddy/trial_store.hpp"
