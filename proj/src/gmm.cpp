// Copyright (C) 2026 The gemb authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License

#include "gemb/gmm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "gemb/error.hpp"
#include "gemb/rng.hpp"

namespace gemb {

namespace {

const double kLn2Pi = std::log(2.0 * std::numbers::pi);
constexpr double kWeightFloor = 1e-10;
constexpr int kMaxConsecutiveCollapses = 3;
constexpr int kKmeansIters = 10;

// Factorizes one covariance in place into (factor, log_det).
// Returns false if the matrix is not positive definite.
bool factorize_one(CovarianceKind kind, const Eigen::MatrixXd& cov, Eigen::MatrixXd& factor,
                   double& log_det) {
  if (kind == CovarianceKind::kFull) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return false;
    factor = llt.matrixL();
    log_det = 2.0 * factor.diagonal().array().log().sum();
  } else {
    if ((cov.col(0).array() <= 0.0).any()) return false;
    factor = cov.col(0).array().sqrt().matrix();
    log_det = cov.col(0).array().log().sum();
  }
  return std::isfinite(log_det);
}

// ln w_j + ln p_j(x_t) for every sample/component pair.
Eigen::MatrixXd log_weighted_densities(const GmmModel& model, const Eigen::MatrixXd& x) {
  const Eigen::Index m = x.rows();
  const Eigen::Index dim = model.dim();
  const int n = model.n_components();
  Eigen::MatrixXd lwd(m, n);
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd diff = (x.rowwise() - model.means.row(j)).transpose();  // dim x m
    Eigen::VectorXd quad;
    if (model.kind == CovarianceKind::kFull) {
      model.factors[static_cast<size_t>(j)].triangularView<Eigen::Lower>().solveInPlace(diff);
      quad = diff.colwise().squaredNorm();
    } else {
      quad = (diff.array().colwise() / model.factors[static_cast<size_t>(j)].col(0).array())
                 .square()
                 .colwise()
                 .sum();
    }
    lwd.col(j) = (-0.5 * (static_cast<double>(dim) * kLn2Pi + model.log_dets(j) + quad.array()) +
                  std::log(model.weights(j)))
                     .matrix();
  }
  return lwd;
}

struct EStep {
  Eigen::MatrixXd resp;       // m x N, rows sum to 1
  Eigen::VectorXd sample_ll;  // m, ln sum_j w_j p_j(x_t)
  double total_ll = 0.0;
};

EStep e_step(const GmmModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd lwd = log_weighted_densities(model, x);
  EStep out;
  const Eigen::VectorXd mx = lwd.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = ((lwd.colwise() - mx).array().exp()).matrix();
  const Eigen::VectorXd sums = shifted.rowwise().sum();
  out.resp = shifted.array().colwise() / sums.array();
  out.sample_ll = mx.array() + sums.array().log();
  out.total_ll = out.sample_ll.sum();
  return out;
}

Eigen::VectorXd per_dimension_variance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows()))
      .transpose();
}

void check_shapes(const GmmModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.dim())
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(model.dim()));
}

// k-means++ seeding followed by a few Lloyd iterations; returns hard
// assignments. Empty clusters grab the point farthest from its center.
std::vector<int> kmeans_assignments(const Eigen::MatrixXd& x, int n, std::mt19937_64& gen,
                                    Eigen::MatrixXd& centers) {
  const Eigen::Index m = x.rows();
  const Eigen::Index dim = x.cols();
  centers.resize(n, dim);

  centers.row(0) = x.row(static_cast<Eigen::Index>(rng::bounded(gen, static_cast<uint64_t>(m))));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < n; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng::uniform01(gen) * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        cum += d2(i);
        if (cum >= u) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(k % m);  // duplicates exhausted the spread
    }
    centers.row(k) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<size_t>(m), 0);
  for (int iter = 0; iter <= kKmeansIters; ++iter) {
    // assignment (ties to the lowest component index)
    Eigen::VectorXd best = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd dist = (x.rowwise() - centers.row(k)).rowwise().squaredNorm();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (dist(i) < best(i)) {
          best(i) = dist(i);
          assign[static_cast<size_t>(i)] = k;
        }
      }
    }
    // empty clusters steal the worst-fit point of a cluster that can spare one
    std::vector<Eigen::Index> count(static_cast<size_t>(n), 0);
    for (Eigen::Index i = 0; i < m; ++i) ++count[static_cast<size_t>(assign[static_cast<size_t>(i)])];
    for (int k = 0; k < n; ++k) {
      if (count[static_cast<size_t>(k)] > 0) continue;
      Eigen::Index pick = -1;
      double far = -1.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (count[static_cast<size_t>(assign[static_cast<size_t>(i)])] >= 2 && best(i) > far) {
          far = best(i);
          pick = i;
        }
      }
      --count[static_cast<size_t>(assign[static_cast<size_t>(pick)])];
      assign[static_cast<size_t>(pick)] = k;
      count[static_cast<size_t>(k)] = 1;
      best(pick) = 0.0;
      centers.row(k) = x.row(pick);
    }
    if (iter == kKmeansIters) break;
    // update
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, dim);
    std::vector<double> sizes(static_cast<size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      sums.row(assign[static_cast<size_t>(i)]) += x.row(i);
      sizes[static_cast<size_t>(assign[static_cast<size_t>(i)])] += 1.0;
    }
    for (int k = 0; k < n; ++k)
      if (sizes[static_cast<size_t>(k)] > 0.0) centers.row(k) = sums.row(k) / sizes[static_cast<size_t>(k)];
  }
  return assign;
}

class EmRunner {
 public:
  EmRunner(const Eigen::MatrixXd& x, const EmConfig& cfg, double reg)
      : x_(x), cfg_(cfg), reg_(reg), global_variance_(per_dimension_variance(x)) {}

  EmResult run(std::mt19937_64& gen) {
    EmResult result;
    result.model = initial_model(gen);
    int consecutive_collapses = 0;
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool skip_convergence_check = true;  // nothing to compare on the first pass

    for (int iter = 0;; ++iter) {
      const EStep e = e_step(result.model, x_);
      result.log_likelihood_trace.push_back(e.total_ll);
      result.final_log_likelihood = e.total_ll;
      if (!skip_convergence_check) {
        const double denom = std::max(std::abs(prev_ll), 1e-12);
        if ((e.total_ll - prev_ll) / denom < cfg_.tol) break;
      }
      if (iter == cfg_.max_iters) break;
      const bool collapsed = m_step(result.model, e);
      if (collapsed) {
        if (++consecutive_collapses >= kMaxConsecutiveCollapses)
          throw NumericalError("EM aborted after " + std::to_string(kMaxConsecutiveCollapses) +
                               " consecutive component collapses");
      } else {
        consecutive_collapses = 0;
      }
      skip_convergence_check = collapsed;  // a re-seeded component resets the comparison
      prev_ll = e.total_ll;
      result.n_iters = iter + 1;
    }
    return result;
  }

 private:
  GmmModel initial_model(std::mt19937_64& gen) {
    const int n = cfg_.n_components;
    const Eigen::Index dim = x_.cols();
    GmmModel model;
    model.kind = cfg_.kind;
    model.weights.resize(n);
    model.means.resize(n, dim);
    model.covariances.assign(static_cast<size_t>(n), Eigen::MatrixXd());
    model.factors.assign(static_cast<size_t>(n), Eigen::MatrixXd());
    model.log_dets.resize(n);

    Eigen::MatrixXd centers;
    const std::vector<int> assign = kmeans_assignments(x_, n, gen, centers);

    for (int k = 0; k < n; ++k) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index i = 0; i < x_.rows(); ++i)
        if (assign[static_cast<size_t>(i)] == k) members.push_back(i);
      model.weights(k) = static_cast<double>(members.size()) / static_cast<double>(x_.rows());
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(dim);
      for (Eigen::Index i : members) mean += x_.row(i);
      mean /= static_cast<double>(members.size());
      model.means.row(k) = mean;
      if (members.size() < 2) {
        set_fallback_covariance(model, k);
        continue;
      }
      if (cfg_.kind == CovarianceKind::kFull) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index i : members) {
          const Eigen::RowVectorXd c = x_.row(i) - mean;
          cov.noalias() += c.transpose() * c;
        }
        cov /= static_cast<double>(members.size());
        cov.diagonal().array() += reg_;
        model.covariances[static_cast<size_t>(k)] = cov;
      } else {
        Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index i : members)
          var += (x_.row(i) - mean).array().square().matrix().transpose();
        var /= static_cast<double>(members.size());
        var.array() += reg_;
        model.covariances[static_cast<size_t>(k)] = var;
      }
    }
    model.weights /= model.weights.sum();
    refresh_factorizations(model);
    return model;
  }

  void set_fallback_covariance(GmmModel& model, int k) {
    const Eigen::Index dim = x_.cols();
    Eigen::VectorXd var = global_variance_;
    var.array() += reg_;
    if (model.kind == CovarianceKind::kFull) {
      model.covariances[static_cast<size_t>(k)] = Eigen::MatrixXd(var.asDiagonal());
    } else {
      model.covariances[static_cast<size_t>(k)] = var;
    }
    (void)dim;
  }

  // Returns true if any component collapsed and had to be re-seeded.
  bool m_step(GmmModel& model, const EStep& e) {
    const Eigen::Index m = x_.rows();
    const int n = model.n_components();
    const Eigen::VectorXd nk = e.resp.colwise().sum();
    bool any_collapse = false;

    for (int j = 0; j < n; ++j) {
      const double weight = nk(j) / static_cast<double>(m);
      bool ok = weight >= kWeightFloor;
      if (ok) {
        model.weights(j) = weight;
        model.means.row(j) = (e.resp.col(j).transpose() * x_) / nk(j);
        const Eigen::MatrixXd centered = x_.rowwise() - model.means.row(j);
        if (model.kind == CovarianceKind::kFull) {
          Eigen::MatrixXd cov =
              (centered.transpose() * (e.resp.col(j).asDiagonal() * centered)) / nk(j);
          cov.diagonal().array() += reg_;
          model.covariances[static_cast<size_t>(j)] = cov;
        } else {
          Eigen::VectorXd var =
              (e.resp.col(j).transpose() * centered.array().square().matrix()).transpose() / nk(j);
          var.array() += reg_;
          model.covariances[static_cast<size_t>(j)] = var;
        }
        ok = factorize_one(model.kind, model.covariances[static_cast<size_t>(j)],
                           model.factors[static_cast<size_t>(j)], model.log_dets(j));
      }
      if (!ok) {
        reseed_component(model, j, e);
        any_collapse = true;
      }
    }
    model.weights /= model.weights.sum();
    return any_collapse;
  }

  // Re-seeds a collapsed component at the sample the mixture explains
  // worst (lowest total responsibility mass w_j p_j summed over j).
  void reseed_component(GmmModel& model, int j, const EStep& e) {
    Eigen::Index worst = 0;
    e.sample_ll.minCoeff(&worst);
    model.means.row(j) = x_.row(worst);
    set_fallback_covariance(model, j);
    if (!factorize_one(model.kind, model.covariances[static_cast<size_t>(j)],
                       model.factors[static_cast<size_t>(j)], model.log_dets(j)))
      throw NumericalError("covariance re-seed failed; data variance is degenerate");
    model.weights(j) = 1.0 / static_cast<double>(model.n_components());
  }

  const Eigen::MatrixXd& x_;
  EmConfig cfg_;
  double reg_;
  Eigen::VectorXd global_variance_;
};

}  // namespace

void refresh_factorizations(GmmModel& model) {
  const int n = model.n_components();
  model.factors.resize(static_cast<size_t>(n));
  model.log_dets.resize(n);
  for (int j = 0; j < n; ++j) {
    if (!factorize_one(model.kind, model.covariances[static_cast<size_t>(j)],
                       model.factors[static_cast<size_t>(j)], model.log_dets(j)))
      throw NumericalError("component " + std::to_string(j) + " covariance is not positive definite");
  }
}

double log_component_density(const GmmModel& model, int component, const Eigen::VectorXd& x) {
  if (x.size() != model.dim())
    throw ShapeError("point has " + std::to_string(x.size()) + " dims, model expects " +
                     std::to_string(model.dim()));
  if (component < 0 || component >= model.n_components())
    throw ShapeError("component index " + std::to_string(component) + " out of range");
  const Eigen::VectorXd diff = x - model.means.row(component).transpose();
  double quad;
  if (model.kind == CovarianceKind::kFull) {
    quad = model.factors[static_cast<size_t>(component)]
               .triangularView<Eigen::Lower>()
               .solve(diff)
               .squaredNorm();
  } else {
    quad = (diff.array() / model.factors[static_cast<size_t>(component)].col(0).array())
               .square()
               .sum();
  }
  return -0.5 * (static_cast<double>(model.dim()) * kLn2Pi + model.log_dets(component) + quad);
}

Eigen::MatrixXd posteriors(const GmmModel& model, const FeatureMatrix& x) {
  check_shapes(model, x);
  return e_step(model, x.data).resp;
}

double log_likelihood(const GmmModel& model, const FeatureMatrix& x) {
  check_shapes(model, x);
  return e_step(model, x.data).total_ll;
}

int64_t parameter_count(const GmmModel& model) {
  const int64_t n = model.n_components();
  const int64_t d = model.dim();
  const int64_t covariance_terms = model.kind == CovarianceKind::kFull ? n * d * (d + 1) / 2 : n * d;
  return (n - 1) + n * d + covariance_terms;
}

double bic(const GmmModel& model, const FeatureMatrix& x) {
  return static_cast<double>(parameter_count(model)) * std::log(static_cast<double>(x.rows())) -
         2.0 * log_likelihood(model, x);
}

EmResult fit_gmm(const FeatureMatrix& x, const EmConfig& cfg) {
  validate(x);
  if (cfg.n_components < 1) throw ConfigError("n_components must be >= 1");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (cfg.n_init < 1) throw ConfigError("n_init must be >= 1");
  if (x.rows() < cfg.n_components)
    throw DataError("need at least " + std::to_string(cfg.n_components) + " samples for " +
                    std::to_string(cfg.n_components) + " components, got " + std::to_string(x.rows()));
  double reg = 1e-6 * per_dimension_variance(x.data).mean();
  if (cfg.reg_covar) {
    if (*cfg.reg_covar < 0.0) throw ConfigError("reg_covar must be >= 0");
    reg = *cfg.reg_covar;
  }

  EmRunner runner(x.data, cfg, reg);
  auto gen = rng::engine(cfg.seed);
  std::optional<EmResult> best;
  std::optional<NumericalError> last_failure;
  for (int restart = 0; restart < cfg.n_init; ++restart) {
    try {
      EmResult candidate = runner.run(gen);
      if (!best || candidate.final_log_likelihood > best->final_log_likelihood)
        best = std::move(candidate);
    } catch (const NumericalError& err) {
      last_failure = err;
    }
  }
  if (!best) throw *last_failure;
  return std::move(*best);
}

}  // namespace gemb
