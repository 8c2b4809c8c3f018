#pragma once

#include "ricon/graph.hpp"

namespace ricon {

// Mean of the squared entries of G = H_aware^T H_agnostic (2d x 2d). Both
// encodings must be l x 2d. Non-negative; zero iff every aware column is
// orthogonal to every agnostic column.
Var orth_loss(Graph& graph, Var h_aware, Var h_agnostic);

}  // namespace ricon
