#pragma once

#include <algorithm>
#include <vector>

#include "bihyper/errors.hpp"

namespace bihyper {

// Smallest sample value v with #{x <= v} / N >= q. Definitional walk over the
// sorted copy; ties and singletons behave exactly like the sort-and-count rule.
inline double empiricalQuantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("empiricalQuantile: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    size_t last = i;
    while (last + 1 < values.size() && values[last + 1] == values[i]) ++last;
    if (static_cast<double>(last + 1) / n >= q) return values[i];
    i = last;
  }
  return values.back();
}

}  // namespace bihyper
