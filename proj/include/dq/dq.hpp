#pragma once

// Umbrella header: exact symbolic toolkit for Dirac structures, star-product
// families, parallel transport, and section algebras on foliated charts.

#include "dq/algebroid.hpp"
#include "dq/bigint.hpp"
#include "dq/dirac.hpp"
#include "dq/family.hpp"
#include "dq/hseries.hpp"
#include "dq/holonomy.hpp"
#include "dq/linalg.hpp"
#include "dq/multivector.hpp"
#include "dq/opform.hpp"
#include "dq/parser.hpp"
#include "dq/polydiffop.hpp"
#include "dq/random.hpp"
#include "dq/rational.hpp"
#include "dq/scalar.hpp"
#include "dq/scenario.hpp"
#include "dq/star.hpp"
