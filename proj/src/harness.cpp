#include "corrsift/harness.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "corrsift/selection.hpp"

namespace corrsift {

void SimConfig::validate() const {
  if (p < 2) throw ArgumentError("p must be at least 2");
  if (n() <= p) throw ArgumentError("n = round(n_factor * p) must exceed p");
  if (reps < 1) throw ArgumentError("reps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must be in (0, 1)");
  if (threshold && !(*threshold >= 0.0 && *threshold < 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1)");
  }
  if (threads < 1) throw ArgumentError("threads must be positive");
}

CovarianceMatrix generate_sigma(int p, RngStream& rng, double& w_out) {
  if (p < 2) throw ArgumentError("p must be at least 2");
  // Haar-random orthogonal Q: QR of a Gaussian matrix with the sign of the
  // R diagonal folded into Q.
  Matrix gauss(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) gauss(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ();
  const Matrix r_factor = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j) {
    if (r_factor(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Vector eigenvalues(p);
  for (int i = 0; i < p; ++i) eigenvalues(i) = rng.uniform(1.0, 10.0);
  w_out = rng.uniform();
  Matrix sigma = q * eigenvalues.asDiagonal() * q.transpose();
  sigma.array() += w_out;
  sigma = 0.5 * (sigma + sigma.transpose().eval());
  return CovarianceMatrix(std::move(sigma));
}

CovarianceMatrix generate_sigma(int p, RngStream& rng) {
  double w;
  return generate_sigma(p, rng, w);
}

ThresholdChoice population_threshold(const CovarianceMatrix& sigma, int n,
                                     CapMode cap_mode) {
  const int p = sigma.p();
  if (p < 2) throw ArgumentError("p must be at least 2");
  const CorrelationMatrix rho = correlation_from_covariance(sigma);

  std::vector<double> grid;
  grid.reserve(p * (p - 1) / 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) grid.push_back(std::abs(rho(i, j)));
  }
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ThresholdChoice choice;
  double best_exact = -1.0;
  int best_above_count = std::numeric_limits<int>::max();
  double best_above_c = 1.0;
  for (double candidate : grid) {
    if (!(candidate >= 0.0 && candidate < 1.0)) continue;
    const int k = static_cast<int>(
        select_components(rho, candidate, false).groups.size());
    if (k == 2) {
      // Smallest grid value that still yields exactly two components.
      best_exact = candidate;
    } else if (k > 2 && (k < best_above_count ||
                         (k == best_above_count && candidate < best_above_c))) {
      best_above_count = k;
      best_above_c = candidate;
    }
  }
  if (best_exact >= 0.0) {
    choice.c_tilde = best_exact;
    choice.exact_two_components = true;
  } else {
    choice.c_tilde = best_above_c;
    choice.exact_two_components = false;
  }

  const double deviation = std::sqrt(std::log(static_cast<double>(p)) / n);
  const double raw = choice.c_tilde + deviation;
  const double cap = 1.0 - 1e-8;
  choice.c = cap_mode == CapMode::min ? std::min(raw, cap) : std::max(raw, cap);
  return choice;
}

double effect_size(const CovarianceMatrix& sigma, const IndexSet& group) {
  const IndexSet comp = group_complement(group, sigma.p());
  const double log_full = log_determinant(sigma.matrix());
  const double log_pp = log_determinant(submatrix(sigma.matrix(), group, group));
  const double log_cc = log_determinant(submatrix(sigma.matrix(), comp, comp));
  const double delta = 1.0 - std::exp(log_full - log_pp - log_cc);
  return std::clamp(delta, 0.0, 1.0 - 1e-16);
}

KsResult ks_uniform_test(std::vector<double> values) {
  KsResult out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  std::sort(values.begin(), values.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::clamp(values[i], 0.0, 1.0);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  out.statistic = d;
  const double sqn = std::sqrt(static_cast<double>(n));
  const double lambda = (sqn + 0.12 + 0.11 / sqn) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) *
                        std::exp(-2.0 * k * k * lambda * lambda);
    q += term;
    if (std::abs(term) < 1e-12) break;
  }
  out.p_value = std::clamp(q, 0.0, 1.0);
  return out;
}

Matrix sample_gaussian_rows(int n, const Matrix& chol, RngStream& rng) {
  const int p = static_cast<int>(chol.rows());
  Matrix x(n, p);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = rng.normal();
    x.row(i) = (chol * z).transpose();
  }
  return x;
}

namespace {

// Runs fn(replicate) over [0, reps) on `threads` workers. Replicate-level
// determinism comes from each replicate drawing its own RngStream, so the
// schedule cannot affect results.
void parallel_replicates(int reps, int threads,
                         const std::function<void(int)>& fn) {
  if (threads <= 1) {
    for (int i = 0; i < reps; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= reps) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// Uniform pick of a group with nonempty complement; -1 when none exists.
int pick_group(const Partition& partition, int p, RngStream& rng) {
  std::vector<int> eligible;
  for (std::size_t i = 0; i < partition.groups.size(); ++i) {
    if (static_cast<int>(partition.groups[i].size()) < p) {
      eligible.push_back(static_cast<int>(i));
    }
  }
  if (eligible.empty()) return -1;
  const std::size_t pick = std::min<std::size_t>(
      eligible.size() - 1,
      static_cast<std::size_t>(rng.uniform() * eligible.size()));
  return eligible[pick];
}

}  // namespace

Type1Result run_type1_experiment(const SimConfig& config) {
  config.validate();
  const int p = config.p;
  const int n = config.n();
  const double c = config.threshold.value_or(0.2);
  const Matrix chol = Matrix::Identity(p, p);

  std::vector<std::optional<Type1Record>> slots(config.reps);
  parallel_replicates(config.reps, config.threads, [&](int rep) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
    const Matrix x = sample_gaussian_rows(n, chol, rng);
    const CovarianceMatrix s = sample_covariance(DataMatrix(x));
    const Partition partition = select_components(s, c, false);
    const int gi = pick_group(partition, p, rng);
    if (gi < 0) return;
    const IndexSet& group = partition.groups[gi];
    try {
      const PValueResult sel = selective_p_value(
          s, n, group, c, MethodPolicy::automatic, config.mc_budget, rng,
          false, config.integration_rel_tol, config.max_subdivisions);
      const CcaDecomposition cca = cca_decompose(s, group);
      const NullSpec spec(n, p, cca.r());
      const ClassicalPValue cls =
          classical_p_value(cca.lambdas, spec, config.mc_budget, rng);
      Type1Record rec;
      rec.replicate = rep;
      rec.group_size = static_cast<int>(group.size());
      rec.r = cca.r();
      rec.p_selective = sel.p;
      rec.p_classical = cls.p;
      rec.selective_method = to_string(sel.method);
      slots[rep] = std::move(rec);
    } catch (const InsufficientAcceptanceError&) {
      // Logged as a skip; the conditioning set had negligible null mass.
    }
  });

  Type1Result out;
  std::vector<double> sel_p, cls_p;
  for (auto& slot : slots) {
    if (!slot) {
      ++out.skipped;
      continue;
    }
    sel_p.push_back(slot->p_selective);
    cls_p.push_back(slot->p_classical);
    out.records.push_back(std::move(*slot));
  }
  out.ks_selective = ks_uniform_test(sel_p);
  out.ks_classical = ks_uniform_test(cls_p);
  return out;
}

PowerResult run_power_experiment(const SimConfig& config, int min_bin_count) {
  config.validate();
  const int p = config.p;
  const int n = config.n();

  std::vector<std::optional<PowerRecord>> slots(config.reps);
  parallel_replicates(config.reps, config.threads, [&](int rep) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
    const CovarianceMatrix sigma = generate_sigma(p, rng);
    const double c =
        config.threshold
            ? *config.threshold
            : population_threshold(sigma, n, config.cap_mode).c;
    const Eigen::LLT<Matrix> llt(sigma.matrix());
    const Matrix chol = llt.matrixL();
    const Matrix x = sample_gaussian_rows(n, chol, rng);
    const CovarianceMatrix s = sample_covariance(DataMatrix(x));
    const Partition partition = select_components(s, c, false);
    const int gi = pick_group(partition, p, rng);
    if (gi < 0) return;
    const IndexSet& group = partition.groups[gi];
    try {
      const PValueResult sel = selective_p_value(
          s, n, group, c, MethodPolicy::automatic, config.mc_budget, rng,
          false, config.integration_rel_tol, config.max_subdivisions);
      const CcaDecomposition cca = cca_decompose(s, group);
      const NullSpec spec(n, p, cca.r());
      const ClassicalPValue cls =
          classical_p_value(cca.lambdas, spec, config.mc_budget, rng);
      PowerRecord rec;
      rec.replicate = rep;
      rec.delta = effect_size(sigma, group);
      rec.delta_bin = std::min(9, static_cast<int>(rec.delta * 10.0));
      rec.rejected_selective = sel.p <= config.alpha;
      rec.rejected_classical = cls.p <= config.alpha;
      rec.r = cca.r();
      slots[rep] = std::move(rec);
    } catch (const InsufficientAcceptanceError&) {
    }
  });

  PowerResult out;
  std::map<int, std::array<long, 3>> bins;  // count, sel rejects, cls rejects
  for (auto& slot : slots) {
    if (!slot) {
      ++out.skipped;
      continue;
    }
    auto& bin = bins[slot->delta_bin];
    bin[0] += 1;
    bin[1] += slot->rejected_selective ? 1 : 0;
    bin[2] += slot->rejected_classical ? 1 : 0;
    out.records.push_back(std::move(*slot));
  }
  for (const auto& [bin, counts] : bins) {
    if (counts[0] < min_bin_count) continue;
    PowerBin pb;
    pb.bin = bin;
    pb.count = static_cast<int>(counts[0]);
    pb.power_selective = static_cast<double>(counts[1]) / counts[0];
    pb.power_classical = static_cast<double>(counts[2]) / counts[0];
    out.bins.push_back(pb);
  }
  return out;
}

}  // namespace corrsift
