#pragma once

// Umbrella header.

#include "wmass/types.hpp"
#include "wmass/quadrature.hpp"
#include "wmass/fields.hpp"
#include "wmass/perturbation.hpp"
#include "wmass/families.hpp"
#include "wmass/curvature.hpp"
#include "wmass/hypersurface.hpp"
#include "wmass/conformal.hpp"
#include "wmass/mass.hpp"
#include "wmass/staticity.hpp"
#include "wmass/surfaces.hpp"
#include "wmass/runner.hpp"
