#pragma once

#include "radarsim/cfar.hpp"
#include "radarsim/cube.hpp"
#include "radarsim/dataset.hpp"
#include "radarsim/editing.hpp"
#include "radarsim/error.hpp"
#include "radarsim/fitting.hpp"
#include "radarsim/geometry.hpp"
#include "radarsim/io/cube_file.hpp"
#include "radarsim/io/json_io.hpp"
#include "radarsim/io/png.hpp"
#include "radarsim/metrics.hpp"
#include "radarsim/psf.hpp"
#include "radarsim/synthesis.hpp"
#include "radarsim/types.hpp"
