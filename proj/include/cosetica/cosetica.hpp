#ifndef COSETICA_COSETICA_HPP
#define COSETICA_COSETICA_HPP

#include "cosetica/cost_kurtosis.hpp"
#include "cosetica/cost_model.hpp"
#include "cosetica/cost_squared_kurtosis.hpp"
#include "cosetica/csv_io.hpp"
#include "cosetica/evaluation.hpp"
#include "cosetica/manifest.hpp"
#include "cosetica/matrix_exp.hpp"
#include "cosetica/moment_estimation.hpp"
#include "cosetica/newton_engine.hpp"
#include "cosetica/rng.hpp"
#include "cosetica/tensor_algebra.hpp"
#include "cosetica/types.hpp"
#include "cosetica/validation.hpp"

#endif
