#pragma once

#include "sgcov/coverage.hpp"
#include "sgcov/errors.hpp"
#include "sgcov/montecarlo.hpp"
#include "sgcov/params.hpp"
#include "sgcov/quadrature.hpp"
#include "sgcov/spatial.hpp"
#include "sgcov/specfun.hpp"
