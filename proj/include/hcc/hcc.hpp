#pragma once

#include "allocator.hpp"
#include "analysis.hpp"
#include "binomial.hpp"
#include "codec.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "rational.hpp"
#include "simulator.hpp"
