#pragma once

// Umbrella header.

#include "decaysim/config.hpp"
#include "decaysim/conflict.hpp"
#include "decaysim/decayspace.hpp"
#include "decaysim/error.hpp"
#include "decaysim/harness.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/io.hpp"
#include "decaysim/oams.hpp"
#include "decaysim/oracle.hpp"
#include "decaysim/random.hpp"
#include "decaysim/sinrcore.hpp"
#include "decaysim/spaids.hpp"
