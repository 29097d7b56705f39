#pragma once

#include "treedyn/bounds.hpp"
#include "treedyn/constructions.hpp"
#include "treedyn/core.hpp"
#include "treedyn/dynamics.hpp"
#include "treedyn/io.hpp"
#include "treedyn/markov.hpp"
#include "treedyn/polynomial.hpp"
#include "treedyn/spectral.hpp"
#include "treedyn/tree.hpp"
