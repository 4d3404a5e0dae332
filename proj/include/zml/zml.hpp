#pragma once

#include "zml/arith.hpp"
#include "zml/dirichlet.hpp"
#include "zml/error.hpp"
#include "zml/io.hpp"
#include "zml/mollifier.hpp"
#include "zml/moments.hpp"
#include "zml/parallel.hpp"
#include "zml/primes.hpp"
#include "zml/quadrature.hpp"
#include "zml/summation.hpp"
#include "zml/zeta.hpp"
