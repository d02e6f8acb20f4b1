#pragma once

#include "ahe/boundary_geometry.hpp"
#include "ahe/dual.hpp"
#include "ahe/error.hpp"
#include "ahe/expression.hpp"
#include "ahe/fg_expansion.hpp"
#include "ahe/metric_library.hpp"
#include "ahe/quadrature.hpp"
#include "ahe/renormalization.hpp"
#include "ahe/tensor.hpp"
#include "ahe/tensor_core.hpp"
#include "ahe/variation.hpp"
