#pragma once

#include "sle0/configuration.hpp"
#include "sle0/errors.hpp"
#include "sle0/export.hpp"
#include "sle0/link_pattern.hpp"
#include "sle0/locus.hpp"
#include "sle0/loewner.hpp"
#include "sle0/null_vector.hpp"
#include "sle0/pole_solver.hpp"
#include "sle0/polynomial.hpp"
#include "sle0/rational.hpp"
