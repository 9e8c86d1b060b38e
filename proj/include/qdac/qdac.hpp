#pragma once

// Divide-and-conquer estimation of |<0..0|C|0..0>|^2 for geometrically-local
// shallow circuits on 1D/2D/3D lattices, with an exact statevector oracle for
// verification at small sizes.

#include "qdac/common.hpp"
#include "qdac/gates.hpp"
#include "qdac/circuit.hpp"
#include "qdac/lightcone.hpp"
#include "qdac/slicing.hpp"
#include "qdac/dense.hpp"
#include "qdac/block_encoding.hpp"
#include "qdac/synthesis.hpp"
#include "qdac/mps.hpp"
#include "qdac/params.hpp"
#include "qdac/estimator.hpp"
#include "qdac/corpus.hpp"
#include "qdac/results.hpp"
