#pragma once

// Umbrella header for the SELI mean-field game toolkit.

#include "seli/calibration.hpp"
#include "seli/dynamics.hpp"
#include "seli/errors.hpp"
#include "seli/finite_population.hpp"
#include "seli/harness.hpp"
#include "seli/hjb.hpp"
#include "seli/io.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"
#include "seli/qoi.hpp"
#include "seli/solver.hpp"
