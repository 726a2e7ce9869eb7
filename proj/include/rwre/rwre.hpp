#pragma once

// Umbrella header: the whole toolkit in one include.

#include "rwre/dirichlet.hpp"
#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/green.hpp"
#include "rwre/kalikow.hpp"
#include "rwre/lattice.hpp"
#include "rwre/manifest.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/runner.hpp"
#include "rwre/simplex.hpp"
#include "rwre/version.hpp"
#include "rwre/walk.hpp"
