#pragma once

#include <vector>

#include "bihyper/autodiff.hpp"

namespace bihyper {

// Jensen-Shannon mutual-information estimate between node representations h
// (n x k) and graph representations H (g x k) for one batch. Positive pairs
// are (node, its own graph), weighted 1/(g * |G_j|); negatives are all other
// pairs, averaged uniformly. A single-graph batch has no negatives: the
// positive term alone is returned and *hadNegatives (when given) is false.
ad::Var jsdMutualInformation(ad::Var h, ad::Var graphRepr, const std::vector<int>& indicator,
                             bool* hadNegatives = nullptr);

}  // namespace bihyper
