#pragma once

#include "asd/error.hpp"
#include "asd/statdist.hpp"
#include "asd/random.hpp"
#include "asd/simmodel.hpp"
#include "asd/selection.hpp"
#include "asd/closedtest.hpp"
#include "asd/engine.hpp"
#include "asd/config.hpp"
#include "asd/report.hpp"
