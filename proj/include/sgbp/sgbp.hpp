#pragma once

#include "sgbp/collision.hpp"
#include "sgbp/config.hpp"
#include "sgbp/device.hpp"
#include "sgbp/error.hpp"
#include "sgbp/gpc_basis.hpp"
#include "sgbp/gpc_kernels.hpp"
#include "sgbp/io.hpp"
#include "sgbp/phase_grid.hpp"
#include "sgbp/poisson.hpp"
#include "sgbp/polylog.hpp"
#include "sgbp/quadrature.hpp"
#include "sgbp/run_directory.hpp"
#include "sgbp/scaling.hpp"
#include "sgbp/simulate.hpp"
#include "sgbp/transport.hpp"
#include "sgbp/version.hpp"
