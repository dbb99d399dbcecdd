// qbm.hpp: umbrella header

#pragma once

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/interpolation.hpp"
#include "qbm/parallel.hpp"
#include "qbm/spectral.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/evolution.hpp"
#include "qbm/classical.hpp"
#include "qbm/diagnostics.hpp"
#include "qbm/config.hpp"
#include "qbm/run.hpp"
