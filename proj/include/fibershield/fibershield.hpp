#pragma once

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"
#include "fibershield/log.hpp"
#include "fibershield/parallel.hpp"
#include "fibershield/geometry/mesh.hpp"
#include "fibershield/geometry/primitives.hpp"
#include "fibershield/geometry/scenario.hpp"
#include "fibershield/geometry/scenario_io.hpp"
#include "fibershield/geometry/scenario_mesh.hpp"
#include "fibershield/field/triangle_kernel.hpp"
#include "fibershield/field/solver.hpp"
#include "fibershield/field/conduction.hpp"
#include "fibershield/io/csv.hpp"
#include "fibershield/trap/potential_map.hpp"
#include "fibershield/trap/trap_model.hpp"
#include "fibershield/analysis/line_profile.hpp"
#include "fibershield/heating/noise.hpp"
#include "fibershield/heating/curves.hpp"
#include "fibershield/metrology/metrology.hpp"
#include "fibershield/pipeline/presets.hpp"
#include "fibershield/pipeline/manifest.hpp"
#include "fibershield/pipeline/figures.hpp"
