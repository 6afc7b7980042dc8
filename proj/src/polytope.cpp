#include "corrsift/polytope.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>

namespace corrsift {

double Simplex::volume() const {
  const int d = dim();
  Matrix edges(d, d);
  for (int i = 0; i < d; ++i) {
    edges.col(i) = (vertices.row(i + 1) - vertices.row(0)).transpose();
  }
  double vol = std::abs(edges.determinant());
  for (int k = 2; k <= d; ++k) vol /= static_cast<double>(k);
  return vol;
}

PolytopeH build_constraints(const CovarianceMatrix& s,
                            const CcaDecomposition& cca, double c) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1)");
  }
  const int r = cca.r();
  const int n1 = static_cast<int>(cca.group.size());
  const int n2 = static_cast<int>(cca.complement.size());
  const int m = 2 * n1 * n2 + r + 1;

  // Rank-one directions: the cross block of S' is
  // sum_k lambda_k (sqrtPP u_k)(sqrtPcPc v_k)^T; dividing by the (fixed)
  // diagonal gives the correlation coefficients of Prop. 3's linear map.
  const Matrix left = cca.sqrt_S_PP * cca.group_factor();        // n1 x r
  const Matrix right = cca.sqrt_S_PcPc * cca.complement_factor();  // n2 x r

  Vector inv_sd_group(n1), inv_sd_comp(n2);
  for (int i = 0; i < n1; ++i) {
    inv_sd_group(i) = 1.0 / std::sqrt(s(cca.group[i], cca.group[i]));
  }
  for (int j = 0; j < n2; ++j) {
    inv_sd_comp(j) = 1.0 / std::sqrt(s(cca.complement[j], cca.complement[j]));
  }

  PolytopeH poly;
  poly.r = r;
  poly.L = Matrix::Zero(m, r);
  poly.g = Vector::Zero(m);

  int row = 0;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double scale = inv_sd_group(i) * inv_sd_comp(j);
      for (int k = 0; k < r; ++k) {
        const double coef = left(i, k) * right(j, k) * scale;
        poly.L(row, k) = coef;
        poly.L(row + 1, k) = -coef;
      }
      poly.g(row) = c;
      poly.g(row + 1) = c;
      row += 2;
    }
  }
  // Ordering block: lambda_1 <= 1, lambda_l - lambda_{l-1} <= 0, -lambda_r <= 0.
  poly.L(row, 0) = 1.0;
  poly.g(row) = 1.0;
  ++row;
  for (int l = 1; l < r; ++l) {
    poly.L(row, l) = 1.0;
    poly.L(row, l - 1) = -1.0;
    poly.g(row) = 0.0;
    ++row;
  }
  poly.L(row, r - 1) = -1.0;
  poly.g(row) = 0.0;
  return poly;
}

double g_u(const CovarianceMatrix& s, const CcaDecomposition& cca, double c) {
  if (cca.r() != 1) throw ArgumentError("g_u requires r = 1");
  const Matrix corr = correlation_from_covariance(s).matrix();
  double max_cross = 0.0;
  for (int i : cca.group) {
    for (int j : cca.complement) {
      max_cross = std::max(max_cross, std::abs(corr(i, j)));
    }
  }
  if (max_cross == 0.0) return 1.0;
  const double bound = c * cca.lambdas(0) / max_cross;
  return std::min(1.0, bound * bound);
}

namespace {

// Small dynamic bitset for constraint incidence.
class Incidence {
 public:
  explicit Incidence(int bits) : words_((bits + 63) / 64, 0) {}

  void set(int i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }

  Incidence intersect(const Incidence& o) const {
    Incidence out(*this);
    for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] &= o.words_[w];
    return out;
  }

  bool contains(const Incidence& subset) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if ((subset.words_[w] & ~words_[w]) != 0) return false;
    }
    return true;
  }

  int count() const {
    int c = 0;
    for (auto w : words_) c += __builtin_popcountll(w);
    return c;
  }

  void unite(const Incidence& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct DdVertex {
  Vector point;
  Incidence active;
};

}  // namespace

std::vector<Vector> enumerate_vertices(const PolytopeH& poly, double tol) {
  const int r = poly.r;
  if (r < 1) throw ArgumentError("polytope dimension must be at least 1");

  // Normalized candidate cuts, deduplicated by direction (tightest bound
  // kept). The ordered-cube facets are appended afterwards as the seed
  // polytope, so rows matching them are dropped here too.
  struct Cut {
    Vector a;
    double b;
  };
  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<Cut> cuts;
  for (int i = 0; i < poly.rows(); ++i) {
    Vector a = poly.L.row(i).transpose();
    double b = poly.g(i);
    const double norm = a.norm();
    if (norm < 1e-14) {
      if (b < -tol) {
        throw EmptyFeasibleRegionError("constraint 0 <= negative bound");
      }
      continue;
    }
    a /= norm;
    b /= norm;
    std::vector<long long> key(r);
    for (int k = 0; k < r; ++k) {
      key[k] = static_cast<long long>(std::llround(a(k) * 1e9));
    }
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(std::move(key), cuts.size());
      cuts.push_back({std::move(a), b});
    } else if (b < cuts[it->second].b) {
      cuts[it->second].b = b;
    }
  }

  // Seed: the ordered cube {1 >= l1 >= ... >= lr >= 0}, an r-simplex with
  // vertices (1..1, 0..0). Its facets take indices n_cuts .. n_cuts + r.
  const int n_cuts = static_cast<int>(cuts.size());
  const int n_total = n_cuts + r + 1;
  std::vector<Cut> facets(r + 1);
  facets[0].a = Vector::Zero(r);
  facets[0].a(0) = 1.0;
  facets[0].b = 1.0;
  for (int l = 1; l < r; ++l) {
    facets[l].a = Vector::Zero(r);
    facets[l].a(l) = 1.0;
    facets[l].a(l - 1) = -1.0;
    facets[l].a /= facets[l].a.norm();
    facets[l].b = 0.0;
  }
  facets[r].a = Vector::Zero(r);
  facets[r].a(r - 1) = -1.0;
  facets[r].b = 0.0;

  auto slack = [&](const Vector& a, double b, const Vector& v) {
    return b - a.dot(v);
  };

  std::vector<DdVertex> verts;
  for (int j = 0; j <= r; ++j) {
    Vector v = Vector::Zero(r);
    for (int k = 0; k < j; ++k) v(k) = 1.0;
    Incidence inc(n_total);
    for (int f = 0; f <= r; ++f) {
      if (std::abs(slack(facets[f].a, facets[f].b, v)) <= tol) {
        inc.set(n_cuts + f);
      }
    }
    verts.push_back({std::move(v), std::move(inc)});
  }

  // Drop cuts that cannot bind anywhere in the seed simplex.
  std::vector<int> order;
  for (int i = 0; i < n_cuts; ++i) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (const auto& v : verts) vmax = std::max(vmax, cuts[i].a.dot(v.point));
    if (vmax > cuts[i].b + tol) order.push_back(i);
  }
  // Deepest cuts first.
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return cuts[x].b < cuts[y].b;
  });

  for (int ci : order) {
    const Cut& cut = cuts[ci];
    std::vector<double> s(verts.size());
    std::vector<int> pos, neg, zero;
    for (std::size_t vi = 0; vi < verts.size(); ++vi) {
      s[vi] = slack(cut.a, cut.b, verts[vi].point);
      if (s[vi] > tol) {
        pos.push_back(static_cast<int>(vi));
      } else if (s[vi] < -tol) {
        neg.push_back(static_cast<int>(vi));
      } else {
        zero.push_back(static_cast<int>(vi));
      }
    }
    if (neg.empty()) {
      for (int vi : zero) verts[vi].active.set(ci);
      continue;
    }
    if (pos.empty() && zero.empty()) {
      throw EmptyFeasibleRegionError(
          "polytope has no feasible point; inputs are inconsistent");
    }

    // Standard combinatorial adjacency test: u and w are adjacent iff no
    // third generator's active set contains active(u) & active(w). New
    // vertices must be created before survivors are moved out of `verts`.
    std::vector<DdVertex> created;
    for (int u : pos) {
      for (int w : neg) {
        Incidence common = verts[u].active.intersect(verts[w].active);
        if (common.count() < r - 1) continue;
        bool adjacent = true;
        for (std::size_t vi = 0; vi < verts.size(); ++vi) {
          if (static_cast<int>(vi) == u || static_cast<int>(vi) == w) continue;
          if (verts[vi].active.contains(common)) {
            adjacent = false;
            break;
          }
        }
        if (!adjacent) continue;
        const double t = s[u] / (s[u] - s[w]);
        Vector x = verts[u].point + t * (verts[w].point - verts[u].point);
        common.set(ci);
        // Merge with an existing coincident vertex if one appeared.
        bool merged = false;
        for (auto& nv : created) {
          if ((nv.point - x).lpNorm<Eigen::Infinity>() <= tol) {
            nv.active.unite(common);
            merged = true;
            break;
          }
        }
        if (!merged) created.push_back({std::move(x), std::move(common)});
      }
    }
    std::vector<DdVertex> next;
    for (int vi : pos) next.push_back(std::move(verts[vi]));
    for (int vi : zero) {
      verts[vi].active.set(ci);
      next.push_back(std::move(verts[vi]));
    }
    for (auto& nv : created) {
      bool merged = false;
      for (auto& existing : next) {
        if ((existing.point - nv.point).lpNorm<Eigen::Infinity>() <= tol) {
          existing.active.unite(nv.active);
          merged = true;
          break;
        }
      }
      if (!merged) next.push_back(std::move(nv));
    }
    verts = std::move(next);
    if (verts.empty()) {
      throw EmptyFeasibleRegionError(
          "polytope has no feasible point; inputs are inconsistent");
    }
  }

  // Final scrub: recompute feasibility against every original row and keep
  // only genuinely extreme points (active normals spanning r dimensions).
  std::vector<Vector> out;
  for (const auto& v : verts) {
    bool feasible = true;
    std::vector<Vector> active_normals;
    for (int i = 0; i < n_cuts; ++i) {
      const double sl = slack(cuts[i].a, cuts[i].b, v.point);
      if (sl < -tol) {
        feasible = false;
        break;
      }
      if (std::abs(sl) <= tol) active_normals.push_back(cuts[i].a);
    }
    for (int f = 0; f <= r && feasible; ++f) {
      const double sl = slack(facets[f].a, facets[f].b, v.point);
      if (sl < -tol) feasible = false;
      if (std::abs(sl) <= tol) active_normals.push_back(facets[f].a);
    }
    if (!feasible || static_cast<int>(active_normals.size()) < r) continue;
    Matrix normals(active_normals.size(), r);
    for (std::size_t i = 0; i < active_normals.size(); ++i) {
      normals.row(i) = active_normals[i].transpose();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(normals);
    qr.setThreshold(1e-9);
    if (qr.rank() < r) continue;
    bool duplicate = false;
    for (const auto& o : out) {
      if ((o - v.point).lpNorm<Eigen::Infinity>() <= tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(v.point);
  }
  if (out.empty()) {
    throw EmptyFeasibleRegionError(
        "polytope has no feasible point; inputs are inconsistent");
  }
  return out;
}

namespace {

// Facets of the convex hull of `points` (full-dimensional in `dim` coords):
// every `dim`-subset spanning a hyperplane with all points on one side.
// Returns canonical vertex-index sets.
std::vector<std::vector<int>> hull_facets(const std::vector<Vector>& points,
                                          int dim, double scale) {
  const double tol = 1e-9 * std::max(1.0, scale);
  const int n = static_cast<int>(points.size());
  std::set<std::vector<int>> facets;

  std::vector<int> combo(dim);
  for (int i = 0; i < dim; ++i) combo[i] = i;
  auto advance = [&]() {
    int i = dim - 1;
    while (i >= 0 && combo[i] == n - dim + i) --i;
    if (i < 0) return false;
    ++combo[i];
    for (int j = i + 1; j < dim; ++j) combo[j] = combo[j - 1] + 1;
    return true;
  };

  do {
    if (dim == 1) {
      // Hull of 1-d points: the two extreme values.
      break;
    }
    Matrix edges(dim - 1, dim);
    for (int i = 1; i < dim; ++i) {
      edges.row(i - 1) =
          (points[combo[i]] - points[combo[0]]).transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(edges, Eigen::ComputeFullV);
    if (svd.rank() < dim - 1) continue;
    const Vector normal = svd.matrixV().col(dim - 1);
    const double offset = normal.dot(points[combo[0]]);
    bool any_pos = false, any_neg = false;
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      const double d = normal.dot(points[i]) - offset;
      if (d > tol) any_pos = true;
      else if (d < -tol) any_neg = true;
      else members.push_back(i);
      if (any_pos && any_neg) break;
    }
    if (any_pos && any_neg) continue;
    std::sort(members.begin(), members.end());
    facets.insert(std::move(members));
  } while (advance());

  if (dim == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < n; ++i) {
      if (points[i](0) < points[lo](0)) lo = i;
      if (points[i](0) > points[hi](0)) hi = i;
    }
    facets.insert({lo});
    if (hi != lo) facets.insert({hi});
  }
  return {facets.begin(), facets.end()};
}

// Recursive pulling triangulation in projected coordinates. `ids` index the
// caller's original vertex list; output simplices are id tuples.
void pull_triangulate(const std::vector<Vector>& all_points,
                      const std::vector<int>& ids, int dim, bool alternate,
                      std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(ids.size());
  if (n < dim + 1) {
    throw DegenerateGeometryError("face has too few vertices for its dimension");
  }
  // Project onto an orthonormal basis of the affine hull.
  Vector center = Vector::Zero(all_points[ids[0]].size());
  for (int id : ids) center += all_points[id];
  center /= static_cast<double>(n);
  Matrix centered(n, all_points[ids[0]].size());
  for (int i = 0; i < n; ++i) {
    centered.row(i) = (all_points[ids[i]] - center).transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const double scale = svd.singularValues()(0);
  if (svd.singularValues().size() < dim ||
      svd.singularValues()(dim - 1) <= 1e-9 * std::max(1.0, scale)) {
    throw DegenerateGeometryError("vertex set is affinely degenerate");
  }
  const Matrix basis = svd.matrixV().leftCols(dim);
  std::vector<Vector> proj(n);
  for (int i = 0; i < n; ++i) proj[i] = (centered.row(i) * basis).transpose();

  if (n == dim + 1) {
    out.push_back(ids);
    return;
  }

  // Apex: extreme id (min or max) so both variants are deterministic.
  int apex_local = 0;
  for (int i = 1; i < n; ++i) {
    if (alternate ? ids[i] > ids[apex_local] : ids[i] < ids[apex_local]) {
      apex_local = i;
    }
  }
  const int apex_id = ids[apex_local];

  const auto facets = hull_facets(proj, dim, scale);
  for (const auto& facet : facets) {
    if (std::find(facet.begin(), facet.end(), apex_local) != facet.end()) {
      continue;
    }
    std::vector<int> facet_ids;
    facet_ids.reserve(facet.size());
    for (int local : facet) facet_ids.push_back(ids[local]);
    std::vector<std::vector<int>> sub;
    pull_triangulate(all_points, facet_ids, dim - 1, alternate, sub);
    for (auto& simplex : sub) {
      simplex.push_back(apex_id);
      out.push_back(std::move(simplex));
    }
  }
}

}  // namespace

std::vector<Simplex> triangulate(const std::vector<Vector>& vertices,
                                 bool alternate_apex) {
  if (vertices.empty()) {
    throw DegenerateGeometryError("no vertices to triangulate");
  }
  const int r = static_cast<int>(vertices[0].size());
  if (static_cast<int>(vertices.size()) < r + 1) {
    throw DegenerateGeometryError("fewer than r + 1 vertices");
  }
  std::vector<int> ids(vertices.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);

  std::vector<std::vector<int>> tuples;
  pull_triangulate(vertices, ids, r, alternate_apex, tuples);

  std::vector<Simplex> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) {
    Simplex s;
    s.vertices = Matrix(r + 1, r);
    for (int i = 0; i <= r; ++i) s.vertices.row(i) = vertices[t[i]].transpose();
    if (s.volume() > 1e-12) out.push_back(std::move(s));
  }
  if (out.empty()) {
    throw DegenerateGeometryError("triangulation produced no full simplices");
  }
  return out;
}

namespace {

// Grundmann-Moller rule on the standard simplex, degree 2s+1 in `dim`
// dimensions: barycentric points (2*beta + 1) / (2s + dim + 1 - 2i) over
// |beta| = s - i, with alternating-sign layer weights. Weights are
// normalized to sum to one, so the rule maps to any simplex by scaling
// with its volume.
struct CubatureRule {
  std::vector<Vector> barycentric;  // each of size dim + 1
  std::vector<double> weights;
};

void compositions(int total, int parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int head = 0; head <= total; ++head) {
    current.push_back(head);
    compositions(total - head, parts - 1, current, out);
    current.pop_back();
  }
}

CubatureRule make_gm_rule(int dim, int s) {
  const int d = 2 * s + 1;
  CubatureRule rule;
  double weight_sum = 0.0;
  for (int i = 0; i <= s; ++i) {
    const double denom = static_cast<double>(d + dim - 2 * i);
    // log-scale layer weight, sign (-1)^i
    double log_w = d * std::log(denom) - 2.0 * s * std::log(2.0) -
                   std::lgamma(i + 1.0) - std::lgamma(d + dim - i + 1.0);
    const double w = ((i % 2) ? -1.0 : 1.0) * std::exp(log_w);
    std::vector<std::vector<int>> betas;
    std::vector<int> scratch;
    compositions(s - i, dim + 1, scratch, betas);
    for (const auto& beta : betas) {
      Vector bary(dim + 1);
      for (int k = 0; k <= dim; ++k) {
        bary(k) = (2.0 * beta[k] + 1.0) / denom;
      }
      rule.barycentric.push_back(std::move(bary));
      rule.weights.push_back(w);
      weight_sum += w;
    }
  }
  for (auto& w : rule.weights) w /= weight_sum;
  return rule;
}

const CubatureRule& gm_rule(int dim, int s) {
  static std::map<std::pair<int, int>, CubatureRule> cache;
  auto key = std::make_pair(dim, s);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, make_gm_rule(dim, s)).first;
  }
  return it->second;
}

double apply_rule(const std::function<double(const Vector&)>& f,
                  const Simplex& simplex, const CubatureRule& rule,
                  double volume) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    acc += rule.weights[i] * f(simplex.point(rule.barycentric[i]));
  }
  return acc * volume;
}

struct Region {
  Simplex simplex;
  double volume;
  double value;
  double error;

  bool operator<(const Region& o) const { return error < o.error; }
};

Region evaluate_region(const std::function<double(const Vector&)>& f,
                       Simplex simplex, int dim, long& evaluations) {
  const CubatureRule& low = gm_rule(dim, 2);   // degree 5
  const CubatureRule& high = gm_rule(dim, 3);  // degree 7
  Region region;
  region.volume = simplex.volume();
  const double v_low = apply_rule(f, simplex, low, region.volume);
  const double v_high = apply_rule(f, simplex, high, region.volume);
  evaluations +=
      static_cast<long>(low.weights.size() + high.weights.size());
  region.simplex = std::move(simplex);
  region.value = v_high;
  region.error = std::abs(v_high - v_low);
  return region;
}

}  // namespace

IntegrationResult integrate_simplex(
    const std::function<double(const Vector&)>& f, const Simplex& s,
    double rel_tol, int max_subdivisions) {
  const int dim = s.dim();
  IntegrationResult result;

  std::priority_queue<Region> queue;
  queue.push(evaluate_region(f, s, dim, result.evaluations));
  double total_value = queue.top().value;
  double total_error = queue.top().error;

  int subdivisions = 0;
  while (total_error > rel_tol * std::abs(total_value) &&
         subdivisions < max_subdivisions) {
    Region worst = queue.top();
    queue.pop();
    total_value -= worst.value;
    total_error -= worst.error;

    // Longest-edge bisection.
    int ei = 0, ej = 1;
    double longest = -1.0;
    for (int i = 0; i <= dim; ++i) {
      for (int j = i + 1; j <= dim; ++j) {
        const double len =
            (worst.simplex.vertices.row(i) - worst.simplex.vertices.row(j))
                .norm();
        if (len > longest) {
          longest = len;
          ei = i;
          ej = j;
        }
      }
    }
    const Vector mid = 0.5 * (worst.simplex.vertices.row(ei) +
                              worst.simplex.vertices.row(ej))
                                 .transpose();
    for (int side = 0; side < 2; ++side) {
      Simplex child = worst.simplex;
      child.vertices.row(side == 0 ? ei : ej) = mid.transpose();
      Region region = evaluate_region(f, std::move(child), dim,
                                      result.evaluations);
      total_value += region.value;
      total_error += region.error;
      queue.push(std::move(region));
    }
    ++subdivisions;
  }

  result.value = total_value;
  result.error_estimate = total_error;
  result.converged = total_error <= rel_tol * std::abs(total_value);
  return result;
}

}  // namespace corrsift
