// Convenience umbrella for the whole library. The CLI parser is not
// included here; pull in ppt/cli.hpp explicitly if you want CLI11.

#pragma once

#include "ppt/analytic.hpp"
#include "ppt/config.hpp"
#include "ppt/experiment.hpp"
#include "ppt/gamma.hpp"
#include "ppt/optimizer.hpp"
#include "ppt/simulation.hpp"
#include "ppt/version.hpp"
