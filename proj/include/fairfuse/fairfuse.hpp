#pragma once

// Umbrella header: bias auditing and fair fusion of black-box sentiment
// scorers over gender-swapped two-actor templates.

#include "fairfuse/blackbox.hpp"
#include "fairfuse/config.hpp"
#include "fairfuse/corpus.hpp"
#include "fairfuse/csv.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/frontier.hpp"
#include "fairfuse/fusion.hpp"
#include "fairfuse/metrics.hpp"
#include "fairfuse/report.hpp"
#include "fairfuse/rng.hpp"
#include "fairfuse/tdist.hpp"
