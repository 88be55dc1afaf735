#pragma once

#include "magray/errors.hpp"
#include "magray/polynomial.hpp"
#include "magray/scalar_field.hpp"
#include "magray/scenario.hpp"
#include "magray/geometry.hpp"
#include "magray/tensor.hpp"
#include "magray/time_profile.hpp"
#include "magray/spacetime.hpp"
#include "magray/quadrature.hpp"
#include "magray/flow.hpp"
#include "magray/parallel.hpp"
#include "magray/random.hpp"
#include "magray/grid.hpp"
#include "magray/transforms.hpp"
#include "magray/harmonics.hpp"
#include "magray/kernels.hpp"
#include "magray/suite.hpp"
#include "magray/io.hpp"
