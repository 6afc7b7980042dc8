#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "corrsift/rng.hpp"
#include "corrsift/selection.hpp"

using namespace corrsift;

namespace {

CorrelationMatrix corr(Matrix r) { return CorrelationMatrix(std::move(r)); }

Matrix random_correlation(int p, RngStream& rng) {
  Matrix a(p + 2, p);
  for (int i = 0; i < p + 2; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  }
  Matrix s = a.transpose() * a;
  Matrix r(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      r(i, j) = s(i, j) / std::sqrt(s(i, i) * s(j, j));
    }
  }
  for (int i = 0; i < p; ++i) r(i, i) = 1.0;
  return r;
}

}  // namespace

TEST_CASE("identity correlation gives all singletons") {
  const CovarianceMatrix s(Matrix::Identity(3, 3));
  const Partition part = select_components(s, 0.1, false);
  REQUIRE(part.groups.size() == 3);
  CHECK(part.groups[0] == IndexSet{0});
  CHECK(part.groups[1] == IndexSet{1});
  CHECK(part.groups[2] == IndexSet{2});
  CHECK(part.threshold_used == 0.1);
}

TEST_CASE("block-diagonal correlation splits into its blocks") {
  Matrix r = Matrix::Identity(4, 4);
  r(0, 1) = r(1, 0) = 0.9;
  r(2, 3) = r(3, 2) = 0.9;
  const Partition part = select_components(corr(r), 0.5, false);
  REQUIRE(part.groups.size() == 2);
  CHECK(part.groups[0] == IndexSet{0, 1});
  CHECK(part.groups[1] == IndexSet{2, 3});
}

TEST_CASE("path connectivity merges through an intermediate vertex") {
  Matrix r = Matrix::Identity(3, 3);
  r(0, 1) = r(1, 0) = 0.3;
  r(1, 2) = r(2, 1) = 0.3;
  const Partition part = select_components(corr(r), 0.2, false);
  REQUIRE(part.groups.size() == 1);
  CHECK(part.groups[0] == IndexSet{0, 1, 2});
}

TEST_CASE("edges use strict inequality |R| > c") {
  Matrix r = Matrix::Identity(2, 2);
  r(0, 1) = r(1, 0) = 0.3;
  CHECK(select_components(corr(r), 0.3, false).groups.size() == 2);
  CHECK(select_components(corr(r), 0.2999999, false).groups.size() == 1);
}

TEST_CASE("negative correlations count through their magnitude") {
  Matrix r = Matrix::Identity(2, 2);
  r(0, 1) = r(1, 0) = -0.8;
  CHECK(select_components(corr(r), 0.5, false).groups.size() == 1);
}

TEST_CASE("threshold outside [0,1) is rejected") {
  const CovarianceMatrix s(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(select_components(s, -0.1, false), ArgumentError);
  CHECK_THROWS_AS(select_components(s, 1.0, false), ArgumentError);
  CHECK_NOTHROW(select_components(s, 0.0, false));
}

TEST_CASE("ordered mode keeps only consecutive-index components") {
  Matrix r = Matrix::Identity(4, 4);
  r(0, 2) = r(2, 0) = 0.9;  // component {0, 2}: not consecutive
  r(1, 3) = r(3, 1) = 0.0;
  const Partition unordered = select_components(corr(r), 0.5, false);
  REQUIRE(unordered.groups.size() == 3);
  const Partition ordered = select_components(corr(r), 0.5, true);
  // {0,2} dropped; singletons {1} and {3} are trivially consecutive.
  REQUIRE(ordered.groups.size() == 2);
  CHECK(ordered.groups[0] == IndexSet{1});
  CHECK(ordered.groups[1] == IndexSet{3});
  CHECK(ordered.ordered_mode);
}

TEST_CASE("selection is invariant to positive diagonal scaling") {
  RngStream rng(4, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix r = random_correlation(6, rng);
    Vector d(6);
    for (int i = 0; i < 6; ++i) d(i) = rng.uniform(0.2, 4.0);
    Matrix s = d.asDiagonal() * r * d.asDiagonal();
    s = 0.5 * (s + s.transpose().eval());
    const double c = rng.uniform(0.0, 0.9);
    const Partition from_r = select_components(corr(r), c, false);
    const Partition from_s = select_components(CovarianceMatrix(s), c, false);
    CHECK(from_r.groups == from_s.groups);
  }
}

TEST_CASE("selection is permutation-equivariant in unordered mode") {
  RngStream rng(12, 0);
  const int p = 6;
  const Matrix r = random_correlation(p, rng);
  const std::vector<int> perm{3, 1, 5, 0, 4, 2};
  Matrix rp(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) rp(i, j) = r(perm[i], perm[j]);
  }
  const double c = 0.25;
  const Partition base = select_components(corr(r), c, false);
  const Partition permuted = select_components(corr(rp), c, false);
  // Map permuted groups back and compare as canonical sets of sets.
  std::vector<IndexSet> mapped;
  for (const auto& g : permuted.groups) {
    IndexSet back;
    for (int idx : g) back.push_back(perm[idx]);
    std::sort(back.begin(), back.end());
    mapped.push_back(std::move(back));
  }
  std::sort(mapped.begin(), mapped.end());
  std::vector<IndexSet> expected = base.groups;
  std::sort(expected.begin(), expected.end());
  CHECK(mapped == expected);
}

TEST_CASE("raising the threshold never merges components") {
  RngStream rng(77, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix r = random_correlation(7, rng);
    const double c_lo = rng.uniform(0.0, 0.5);
    const double c_hi = c_lo + rng.uniform(0.0, 0.45);
    const Partition coarse = select_components(corr(r), c_lo, false);
    const Partition fine = select_components(corr(r), c_hi, false);
    for (const auto& fine_group : fine.groups) {
      bool nested = false;
      for (const auto& coarse_group : coarse.groups) {
        if (std::includes(coarse_group.begin(), coarse_group.end(),
                          fine_group.begin(), fine_group.end())) {
          nested = true;
          break;
        }
      }
      CHECK(nested);
    }
  }
}

TEST_CASE("c = 0 with all correlations nonzero gives one group") {
  RngStream rng(31, 0);
  Matrix r = random_correlation(5, rng);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j && r(i, j) == 0.0) r(i, j) = 0.01;
    }
  }
  const Partition part = select_components(corr(r), 0.0, false);
  REQUIRE(part.groups.size() == 1);
  CHECK(part.groups[0].size() == 5);
}

TEST_CASE("groups partition {0..p-1} in unordered mode") {
  RngStream rng(91, 0);
  const Matrix r = random_correlation(8, rng);
  const Partition part = select_components(corr(r), 0.3, false);
  IndexSet all;
  for (const auto& g : part.groups) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  IndexSet expected(8);
  for (int i = 0; i < 8; ++i) expected[i] = i;
  CHECK(all == expected);
}

TEST_CASE("Partition::contains matches exact group membership") {
  Matrix r = Matrix::Identity(3, 3);
  r(0, 1) = r(1, 0) = 0.9;
  const Partition part = select_components(corr(r), 0.5, false);
  CHECK(part.contains({0, 1}));
  CHECK(part.contains({2}));
  CHECK_FALSE(part.contains({0}));
  CHECK_FALSE(part.contains({0, 1, 2}));
}

TEST_CASE("group_complement basics") {
  CHECK(group_complement({0, 1}, 4) == IndexSet{2, 3});
  CHECK(group_complement({2}, 3) == IndexSet{0, 1});
  CHECK(group_complement({1, 3}, 5) == IndexSet{0, 2, 4});
  CHECK_THROWS_AS(group_complement({}, 3), ArgumentError);
  CHECK_THROWS_AS(group_complement({0, 1, 2}, 3), ArgumentError);
}
