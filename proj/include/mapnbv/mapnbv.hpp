#pragma once

#include "mapnbv/candidates.hpp"
#include "mapnbv/convex_hull.hpp"
#include "mapnbv/episode.hpp"
#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/io/config.hpp"
#include "mapnbv/io/external_predictor.hpp"
#include "mapnbv/io/mesh_io.hpp"
#include "mapnbv/io/report_io.hpp"
#include "mapnbv/io/suite_io.hpp"
#include "mapnbv/io/tables.hpp"
#include "mapnbv/lattice.hpp"
#include "mapnbv/mesh.hpp"
#include "mapnbv/path_planner.hpp"
#include "mapnbv/planners.hpp"
#include "mapnbv/predictor.hpp"
#include "mapnbv/procedural.hpp"
#include "mapnbv/random.hpp"
#include "mapnbv/scene.hpp"
#include "mapnbv/visibility.hpp"
