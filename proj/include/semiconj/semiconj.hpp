#pragma once

#include "semiconj/action_format.hpp"
#include "semiconj/cocycle.hpp"
#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/int_matrix.hpp"
#include "semiconj/parallel.hpp"
#include "semiconj/presets.hpp"
#include "semiconj/solver.hpp"
#include "semiconj/spectral.hpp"
#include "semiconj/torus_map.hpp"
#include "semiconj/verify.hpp"
#include "semiconj/word.hpp"
