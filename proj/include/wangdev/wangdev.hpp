#pragma once

#include "common.hpp"
#include "config.hpp"
#include "convexgeom.hpp"
#include "cubicdiff.hpp"
#include "develop.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "sl3.hpp"
#include "transport.hpp"
#include "wangpde.hpp"
