#pragma once

#include "denslice/carve.hpp"
#include "denslice/csv.hpp"
#include "denslice/density.hpp"
#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/gower.hpp"
#include "denslice/io.hpp"
#include "denslice/isolation_forest.hpp"
#include "denslice/partition.hpp"
#include "denslice/positivity.hpp"
#include "denslice/render.hpp"
#include "denslice/rng.hpp"
#include "denslice/slice.hpp"
#include "denslice/subset.hpp"
#include "denslice/uniformity.hpp"
