#ifndef CORRSIFT_SELECTION_HPP
#define CORRSIFT_SELECTION_HPP

#include <vector>

#include "corrsift/linalg.hpp"

namespace corrsift {

// Output of the thresholding selection. Groups are emitted in canonical
// form: members ascending, groups sorted by smallest member.
struct Partition {
  std::vector<IndexSet> groups;
  bool ordered_mode = false;
  double threshold_used = 0.0;

  bool contains(const IndexSet& group) const;
};

// Thresholds |R_ij(S)| > c into an adjacency graph and returns its
// connected components. In ordered mode only components made of
// consecutive indices are retained.
Partition select_components(const CovarianceMatrix& s, double c, bool ordered);

// Same procedure applied directly to a correlation matrix.
Partition select_components(const CorrelationMatrix& r, double c,
                            bool ordered);

// {0..p-1} \ group, ascending. Rejects empty and full groups.
IndexSet group_complement(const IndexSet& group, int p);

}  // namespace corrsift

#endif  // CORRSIFT_SELECTION_HPP
