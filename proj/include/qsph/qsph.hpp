#pragma once

#include "qsph/qcore.hpp"
#include "qsph/opalg.hpp"
#include "qsph/podles.hpp"
#include "qsph/s4q.hpp"
#include "qsph/oddspheres.hpp"
