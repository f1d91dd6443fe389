#pragma once

#include "mts/cone.hpp"
#include "mts/constructions.hpp"
#include "mts/dealer.hpp"
#include "mts/error.hpp"
#include "mts/field.hpp"
#include "mts/optimal.hpp"
#include "mts/plan.hpp"
#include "mts/rational.hpp"
#include "mts/scheme.hpp"
#include "mts/scheme_io.hpp"
#include "mts/simplex.hpp"
#include "mts/structure.hpp"
#include "mts/verify.hpp"
