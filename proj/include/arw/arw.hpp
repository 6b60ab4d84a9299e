#pragma once

#include "arw/arithmetic.hpp"
#include "arw/config.hpp"
#include "arw/correlations.hpp"
#include "arw/error.hpp"
#include "arw/field.hpp"
#include "arw/kacrice.hpp"
#include "arw/nodal.hpp"
#include "arw/parallel.hpp"
#include "arw/rng.hpp"
