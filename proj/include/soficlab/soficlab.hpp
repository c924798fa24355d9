#pragma once

#include "soficlab/alphabet.hpp"
#include "soficlab/config.hpp"
#include "soficlab/distribution.hpp"
#include "soficlab/group.hpp"
#include "soficlab/lab.hpp"
#include "soficlab/microstate.hpp"
#include "soficlab/model.hpp"
#include "soficlab/oracle.hpp"
#include "soficlab/permutation.hpp"
#include "soficlab/rng.hpp"
#include "soficlab/runner.hpp"
#include "soficlab/tower.hpp"
#include "soficlab/transport.hpp"
#include "soficlab/version.hpp"
