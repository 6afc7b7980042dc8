#include "corrsift/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace corrsift {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

Partition components_from_correlation(const Matrix& r, double c,
                                      bool ordered) {
  const int p = static_cast<int>(r.rows());
  UnionFind uf(p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (std::abs(r(i, j)) > c) uf.unite(i, j);
    }
  }
  std::vector<IndexSet> groups;
  std::vector<int> root_to_group(p, -1);
  for (int i = 0; i < p; ++i) {
    const int root = uf.find(i);
    if (root_to_group[root] < 0) {
      root_to_group[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[root_to_group[root]].push_back(i);
  }
  // Members come out ascending and groups sorted by smallest member because
  // roots are visited in index order and unite() keeps the smaller root.
  if (ordered) {
    std::vector<IndexSet> kept;
    for (auto& g : groups) {
      if (g.back() - g.front() + 1 == static_cast<int>(g.size())) {
        kept.push_back(std::move(g));
      }
    }
    groups = std::move(kept);
  }
  Partition out;
  out.groups = std::move(groups);
  out.ordered_mode = ordered;
  out.threshold_used = c;
  return out;
}

}  // namespace

bool Partition::contains(const IndexSet& group) const {
  return std::any_of(groups.begin(), groups.end(),
                     [&](const IndexSet& g) { return g == group; });
}

Partition select_components(const CovarianceMatrix& s, double c,
                            bool ordered) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1)");
  }
  return components_from_correlation(
      correlation_from_covariance(s).matrix(), c, ordered);
}

Partition select_components(const CorrelationMatrix& r, double c,
                            bool ordered) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1)");
  }
  return components_from_correlation(r.matrix(), c, ordered);
}

IndexSet group_complement(const IndexSet& group, int p) {
  if (group.empty()) throw ArgumentError("group must be nonempty");
  if (static_cast<int>(group.size()) >= p) {
    throw ArgumentError("group must be a proper subset of the variables");
  }
  std::vector<bool> member(p, false);
  for (int i : group) {
    if (i < 0 || i >= p) throw ArgumentError("group index out of range");
    member[i] = true;
  }
  IndexSet out;
  out.reserve(p - group.size());
  for (int i = 0; i < p; ++i) {
    if (!member[i]) out.push_back(i);
  }
  return out;
}

}  // namespace corrsift
