#pragma once

#include "contagion/errors.hpp"
#include "contagion/polynomial.hpp"
#include "contagion/model.hpp"
#include "contagion/simplex.hpp"
#include "contagion/handelman.hpp"
#include "contagion/equality.hpp"
#include "contagion/simulate.hpp"
#include "contagion/stats.hpp"
#include "contagion/exchangeability.hpp"
#include "contagion/io.hpp"
