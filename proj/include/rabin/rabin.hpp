#pragma once

// Everything in one include.

#include "rabin/error.hpp"
#include "rabin/ltl.hpp"
#include "rabin/dra.hpp"
#include "rabin/hoa.hpp"
#include "rabin/fragment_dra.hpp"
#include "rabin/mdp.hpp"
#include "rabin/mdp_io.hpp"
#include "rabin/grid_world.hpp"
#include "rabin/traffic.hpp"
#include "rabin/product.hpp"
#include "rabin/solver.hpp"
#include "rabin/verifier.hpp"
#include "rabin/learner.hpp"
#include "rabin/demos.hpp"
#include "rabin/trace_io.hpp"
