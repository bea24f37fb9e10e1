#pragma once

#include "hnequiv/condexp.hpp"
#include "hnequiv/dist.hpp"
#include "hnequiv/errors.hpp"
#include "hnequiv/estimators.hpp"
#include "hnequiv/mre_location.hpp"
#include "hnequiv/quadrature.hpp"
#include "hnequiv/report.hpp"
#include "hnequiv/rng.hpp"
#include "hnequiv/simharness.hpp"
#include "hnequiv/specfun.hpp"
#include "hnequiv/version.hpp"
