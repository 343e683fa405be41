#pragma once

#include "cluster_engine.hpp"
#include "cluster_labeling.hpp"
#include "disjoint_set.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "io.hpp"
#include "neighborhood.hpp"
#include "pipeline.hpp"
#include "region_geometry.hpp"
#include "render.hpp"
#include "synthetic.hpp"
