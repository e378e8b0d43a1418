#pragma once

// Umbrella header.

#include "plap/config.hpp"
#include "plap/eigen.hpp"
#include "plap/errors.hpp"
#include "plap/io.hpp"
#include "plap/multiplicity.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/parallel.hpp"
#include "plap/ptrig.hpp"
#include "plap/shooter.hpp"
#include "plap/spiral.hpp"
#include "plap/verify.hpp"
#include "plap/cli.hpp"
