#pragma once

#include "mvrisk/distribution.hpp"
#include "mvrisk/enumeration.hpp"
#include "mvrisk/environment.hpp"
#include "mvrisk/episode.hpp"
#include "mvrisk/json_io.hpp"
#include "mvrisk/policy.hpp"
#include "mvrisk/policy_factory.hpp"
#include "mvrisk/random.hpp"
#include "mvrisk/regret.hpp"
#include "mvrisk/sample_stats.hpp"
#include "mvrisk/scenarios.hpp"
#include "mvrisk/theory.hpp"
