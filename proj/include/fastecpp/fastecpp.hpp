#pragma once

#include "fastecpp/bigint.hpp"
#include "fastecpp/binio.hpp"
#include "fastecpp/cert.hpp"
#include "fastecpp/cm.hpp"
#include "fastecpp/curve.hpp"
#include "fastecpp/disc.hpp"
#include "fastecpp/input.hpp"
#include "fastecpp/mpreal.hpp"
#include "fastecpp/numth.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/poly.hpp"
#include "fastecpp/primes.hpp"
#include "fastecpp/prover.hpp"
#include "fastecpp/stats.hpp"
#include "fastecpp/trialdiv.hpp"
