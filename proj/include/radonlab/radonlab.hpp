#pragma once

#include "circle_method.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "fft.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "martingales.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"
#include "radon.hpp"
#include "seminorms.hpp"
#include "special_functions.hpp"
