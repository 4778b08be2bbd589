#pragma once

#include "noc3d/config.hpp"
#include "noc3d/core.hpp"
#include "noc3d/layout.hpp"
#include "noc3d/pipeline.hpp"
#include "noc3d/power.hpp"
#include "noc3d/reliability.hpp"
#include "noc3d/sparse.hpp"
#include "noc3d/svg.hpp"
#include "noc3d/thermal.hpp"
#include "noc3d/traffic.hpp"
