#pragma once

#include "switchq/commands.hpp"
#include "switchq/config.hpp"
#include "switchq/csv.hpp"
#include "switchq/distributions.hpp"
#include "switchq/limit_laws.hpp"
#include "switchq/matrix.hpp"
#include "switchq/power_series.hpp"
#include "switchq/rng.hpp"
#include "switchq/simulator.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"
#include "switchq/verify.hpp"
#include "switchq/version.hpp"
