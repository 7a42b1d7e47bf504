#pragma once

#include "shelterflow/cohorts.hpp"
#include "shelterflow/config.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/export.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"
#include "shelterflow/pipeline.hpp"
#include "shelterflow/stats.hpp"
#include "shelterflow/synthgen.hpp"
#include "shelterflow/timeline.hpp"
