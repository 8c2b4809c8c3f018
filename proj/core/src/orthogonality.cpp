#include "ricon/orthogonality.hpp"

#include "ricon/errors.hpp"
#include "ricon/ops.hpp"

namespace ricon {

Var orth_loss(Graph&, Var h_aware, Var h_agnostic) {
  if (h_aware.shape() != h_agnostic.shape()) {
    throw ContractError("orth_loss: encodings differ in shape, " + shape_string(h_aware.shape()) +
                        " vs " + shape_string(h_agnostic.shape()));
  }
  Var gram = ops::matmul(ops::transpose(h_aware), h_agnostic);
  return ops::mean(ops::mul(gram, gram));
}

}  // namespace ricon
