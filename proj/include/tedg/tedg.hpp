#pragma once

// Umbrella header for the transverse-electric DG solver library.

#include "tedg/analysis.hpp"
#include "tedg/commands.hpp"
#include "tedg/config.hpp"
#include "tedg/io.hpp"
#include "tedg/materials.hpp"
#include "tedg/mesh.hpp"
#include "tedg/quadrature.hpp"
#include "tedg/reference_element.hpp"
#include "tedg/scenarios.hpp"
#include "tedg/semidiscrete.hpp"
#include "tedg/timestep.hpp"
#include "tedg/types.hpp"
