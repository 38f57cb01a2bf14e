//
// Copyright 2026 The Taxo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Score regressors over sentence embeddings: ordinary least squares,
// k-nearest neighbours, CART regression tree and epsilon-insensitive SVR
// with an RBF kernel.

#ifndef TAXO_REGRESSORS_HPP_
#define TAXO_REGRESSORS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class RegressorKind { kOls, kKnn, kTree, kSvr };

inline std::string_view to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::kOls: return "ols";
    case RegressorKind::kKnn: return "knn";
    case RegressorKind::kTree: return "tree";
    case RegressorKind::kSvr: return "svr";
  }
  return "ols";
}

inline RegressorKind parse_regressor_kind(std::string_view s) {
  if (s == "ols") return RegressorKind::kOls;
  if (s == "knn") return RegressorKind::kKnn;
  if (s == "tree") return RegressorKind::kTree;
  if (s == "svr") return RegressorKind::kSvr;
  throw ConfigError("unknown regressor '" + std::string(s) +
                    "' (expected one of: ols, knn, tree, svr)");
}

struct RegressorParams {
  int knn_k = 5;
  double svr_epsilon = 0.2;
  double svr_C = 1.0;
  // RBF width; <= 0 selects 1 / (n_features * Var(X)).
  double svr_gamma = 0.0;
  double svr_tolerance = 1e-3;
  long svr_max_iterations = 10'000'000;
};

// ---------------------------------------------------------------------------
// OLS with intercept. The data are centred and the coefficient vector is
// the minimum-norm least-squares solution, so rank-deficient designs still
// produce a model (flagged).

struct OlsModel {
  Vector coefficients;
  double intercept = 0.0;
  Eigen::Index rank = 0;
  bool rank_deficient = false;

  double predict(const Eigen::Ref<const Vector>& x) const {
    return intercept + coefficients.dot(x);
  }
};

inline OlsModel fit_ols(const Matrix& x, const Vector& y) {
  const Vector mean_x = x.colwise().mean().transpose();
  const double mean_y = y.mean();
  const Matrix centred = x.rowwise() - mean_x.transpose();
  const Vector yc = y.array() - mean_y;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(centred);
  OlsModel m;
  m.coefficients = cod.solve(yc);
  m.intercept = mean_y - mean_x.dot(m.coefficients);
  m.rank = cod.rank();
  m.rank_deficient = m.rank < x.cols();
  return m;
}

// ---------------------------------------------------------------------------
// KNN: uniform mean over the k nearest training rows by Euclidean distance;
// equal distances resolve to the earlier training row.

struct KnnModel {
  Matrix train;
  Vector targets;
  int k = 5;

  // Training-row indices of the k nearest neighbours, nearest first.
  std::vector<Eigen::Index> neighbours(const Eigen::Ref<const Vector>& x) const {
    std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(train.rows()));
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      d[static_cast<std::size_t>(i)] = {(train.row(i).transpose() - x).squaredNorm(), i};
    }
    const auto kk = static_cast<std::size_t>(k);
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    std::vector<Eigen::Index> out;
    for (std::size_t r = 0; r < kk; ++r) out.push_back(d[r].second);
    return out;
  }

  double predict(const Eigen::Ref<const Vector>& x) const {
    double sum = 0.0;
    for (Eigen::Index i : neighbours(x)) sum += targets(i);
    return sum / static_cast<double>(k);
  }
};

// ---------------------------------------------------------------------------
// CART regression tree, squared-error splits, grown to purity.

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Vector>& x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(at)];
      at = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 1}};
    while (!stack.empty()) {
      auto [at, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      const TreeNode& n = nodes[static_cast<std::size_t>(at)];
      if (n.feature >= 0) {
        stack.push_back({n.left, d + 1});
        stack.push_back({n.right, d + 1});
      }
    }
    return best;
  }
};

inline TreeModel fit_tree(const Matrix& x, const Vector& y) {
  TreeModel tree;
  struct Pending {
    int node;
    std::vector<Eigen::Index> rows;
  };
  std::vector<Eigen::Index> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  tree.nodes.push_back({});
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const auto& rows = job.rows;
    double total = 0.0;
    bool pure = true;
    for (Eigen::Index r : rows) {
      total += y(r);
      pure = pure && y(r) == y(rows.front());
    }
    const double count = static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(job.node)].value = total / count;
    if (pure || rows.size() < 2) continue;

    // Best split minimises left SSE + right SSE (equivalently maximises
    // sum_l^2 / n_l + sum_r^2 / n_r). First feature/threshold wins ties.
    double best_score = -std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<Eigen::Index> sorted = rows;
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_sum += y(sorted[i]);
        const double lo = x(sorted[i], f);
        const double hi = x(sorted[i + 1], f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = count - nl;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
        if (best_feature < 0 ||
            score > best_score + 1e-12 * std::max(1.0, std::fabs(best_score))) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = lo + (hi - lo) / 2.0;
          if (!(best_threshold < hi)) best_threshold = lo;
        }
      }
    }
    if (best_feature < 0) continue;  // identical inputs: leaf at the mean

    std::vector<Eigen::Index> left_rows;
    std::vector<Eigen::Index> right_rows;
    for (Eigen::Index r : rows) {
      (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    TreeNode& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    stack.push_back({right, std::move(right_rows)});
    stack.push_back({left, std::move(left_rows)});
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Epsilon-SVR, RBF kernel. The dual over 2n variables (alpha, alpha*) is
// solved by SMO with second-order working-set selection; predictions are
// f(x) = sum_i coef_i K(x_i, x) - rho with coef_i = alpha_i - alpha*_i.

inline double rbf_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                         double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

inline Matrix rbf_gram(const Matrix& x, double gamma) {
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = rbf_kernel(x.row(i).transpose(), x.row(j).transpose(), gamma);
    }
  }
  return k;
}

// 1 / (n_features * Var(X)) over all entries; 1 when X is constant.
inline double scale_gamma(const Matrix& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

struct SvrModel {
  Matrix support;
  Vector coef;
  double rho = 0.0;
  double gamma = 1.0;
  double epsilon = 0.2;
  double C = 1.0;
  long iterations = 0;

  double predict(const Eigen::Ref<const Vector>& x) const {
    double sum = -rho;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      sum += coef(i) * rbf_kernel(support.row(i).transpose(), x, gamma);
    }
    return sum;
  }
};

inline SvrModel fit_svr(const Matrix& x, const Vector& z, const RegressorParams& params) {
  if (params.svr_epsilon < 0.0) throw ParameterError("svr epsilon must be non-negative");
  if (!(params.svr_C > 0.0)) throw ParameterError("svr C must be positive");
  const Eigen::Index n = x.rows();
  const Eigen::Index l = 2 * n;
  const double C = params.svr_C;
  const double gamma = params.svr_gamma > 0.0 ? params.svr_gamma : scale_gamma(x);
  const Matrix k = rbf_gram(x, gamma);
  constexpr double kTau = 1e-12;

  auto base = [n](Eigen::Index t) { return t < n ? t : t - n; };
  Vector sign(l);
  Vector alpha = Vector::Zero(l);
  Vector grad(l);
  for (Eigen::Index i = 0; i < n; ++i) {
    sign(i) = 1.0;
    sign(i + n) = -1.0;
    grad(i) = params.svr_epsilon - z(i);
    grad(i + n) = params.svr_epsilon + z(i);
  }
  auto q = [&](Eigen::Index s, Eigen::Index t) { return sign(s) * sign(t) * k(base(s), base(t)); };
  auto at_upper = [&](Eigen::Index t) { return alpha(t) >= C; };
  auto at_lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

  long iteration = 0;
  for (; iteration < params.svr_max_iterations; ++iteration) {
    // Maximal violating i, then j by second-order gain.
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < l; ++t) {
      if (sign(t) > 0) {
        if (!at_upper(t) && -grad(t) >= g_max) { g_max = -grad(t); i = t; }
      } else {
        if (!at_lower(t) && grad(t) >= g_max) { g_max = grad(t); i = t; }
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < l; ++t) {
      if (sign(t) > 0) {
        if (at_lower(t)) continue;
        const double diff = g_max + grad(t);
        g_max2 = std::max(g_max2, grad(t));
        if (i >= 0 && diff > 0.0) {
          const double quad = k(base(i), base(i)) + k(base(t), base(t)) - 2.0 * sign(i) * q(i, t);
          const double gain = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (gain <= best_gain) { best_gain = gain; j = t; }
        }
      } else {
        if (at_upper(t)) continue;
        const double diff = g_max - grad(t);
        g_max2 = std::max(g_max2, -grad(t));
        if (i >= 0 && diff > 0.0) {
          const double quad = k(base(i), base(i)) + k(base(t), base(t)) + 2.0 * sign(i) * q(i, t);
          const double gain = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (gain <= best_gain) { best_gain = gain; j = t; }
        }
      }
    }
    if (i < 0 || j < 0 || g_max + g_max2 < params.svr_tolerance) break;

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    const double qij = q(i, j);
    const double qii = k(base(i), base(i));
    const double qjj = k(base(j), base(j));
    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = -diff; }
      }
      if (diff > 0.0) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = C - diff; }
      } else {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = C + diff; }
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = sum - C; }
      } else {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = sum; }
      }
      if (sum > C) {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = sum - C; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = sum; }
      }
    }
    const double di = alpha(i) - old_i;
    const double dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < l; ++t) grad(t) += q(i, t) * di + q(j, t) * dj;
  }

  // rho from free variables, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < l; ++t) {
    const double yg = sign(t) * grad(t);
    if (at_upper(t)) {
      if (sign(t) < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (sign(t) > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  SvrModel m;
  m.rho = free_count > 0 ? free_sum / free_count : (upper + lower) / 2.0;
  m.gamma = gamma;
  m.epsilon = params.svr_epsilon;
  m.C = C;
  m.iterations = iteration;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) - alpha(i + n) != 0.0) kept.push_back(i);
  }
  m.support.resize(static_cast<Eigen::Index>(kept.size()), x.cols());
  m.coef.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    m.support.row(row) = x.row(kept[r]);
    m.coef(row) = alpha(kept[r]) - alpha(kept[r] + n);
  }
  return m;
}

// max(|r| - epsilon, 0)
inline double epsilon_insensitive_loss(double residual, double epsilon) {
  return std::max(std::fabs(residual) - epsilon, 0.0);
}

// d/dr of the loss; 0 inside the band, sign(r) outside, undefined at |r| = eps
// (returns 0 there).
inline double epsilon_insensitive_slope(double residual, double epsilon) {
  if (std::fabs(residual) <= epsilon) return 0.0;
  return residual > 0.0 ? 1.0 : -1.0;
}

// Primal objective in kernel-expansion form over the training set:
// J(beta, b) = 0.5 beta' K beta + C sum_i L_eps(z_i - (K beta)_i - b).
inline double svr_primal_objective(const Matrix& gram, const Vector& z, const Vector& beta,
                                   double bias, double epsilon, double C) {
  const Vector f = gram * beta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += epsilon_insensitive_loss(z(i) - f(i) - bias, epsilon);
  }
  return 0.5 * beta.dot(f) + C * loss;
}

// Subgradient of svr_primal_objective; the last entry is d/d(bias).
inline Vector svr_primal_subgradient(const Matrix& gram, const Vector& z, const Vector& beta,
                                     double bias, double epsilon, double C) {
  const Vector f = gram * beta;
  Vector slope(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    slope(i) = epsilon_insensitive_slope(z(i) - f(i) - bias, epsilon);
  }
  Vector g(beta.size() + 1);
  g.head(beta.size()) = f - C * gram.transpose() * slope;
  g(beta.size()) = -C * slope.sum();
  return g;
}

// ---------------------------------------------------------------------------
// Unified model.

class RegressorModel {
 public:
  using Model = std::variant<OlsModel, KnnModel, TreeModel, SvrModel>;

  RegressorModel() = default;
  RegressorModel(Model model, Eigen::Index dimension)
      : model_(std::move(model)), dimension_(dimension) {}

  RegressorKind kind() const { return static_cast<RegressorKind>(model_.index()); }
  Eigen::Index dimension() const { return dimension_; }
  const Model& model() const { return model_; }

  template <typename T>
  const T& as() const { return std::get<T>(model_); }

  double predict(const Eigen::Ref<const Vector>& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, model_);
  }

  nlohmann::json to_json() const;
  static RegressorModel from_json(const nlohmann::json& j);

 private:
  Model model_;
  Eigen::Index dimension_ = 0;
};

inline RegressorModel train_regressor(const Matrix& embeddings, const Vector& scores,
                                      RegressorKind kind, const RegressorParams& params = {}) {
  if (embeddings.rows() != scores.size()) {
    throw ShapeError("embeddings and scores differ in length");
  }
  if (embeddings.rows() == 0) throw PreconditionError("cannot fit a regressor on no data");
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores(i)) || scores(i) < kMinScore || scores(i) > kMaxScore) {
      throw ValueError("score at row " + std::to_string(i) + " is outside [1,7]");
    }
  }
  if (!embeddings.allFinite()) throw ValueError("embeddings contain non-finite values");
  switch (kind) {
    case RegressorKind::kOls: {
      OlsModel m = fit_ols(embeddings, scores);
      if (m.rank_deficient) warn("OLS design is rank deficient; using the minimum-norm solution");
      return {std::move(m), embeddings.cols()};
    }
    case RegressorKind::kKnn: {
      if (params.knn_k < 1) throw ParameterError("knn k must be at least 1");
      if (embeddings.rows() < params.knn_k) {
        throw ParameterError("knn needs at least k=" + std::to_string(params.knn_k) +
                             " training rows, got " + std::to_string(embeddings.rows()));
      }
      return {KnnModel{embeddings, scores, params.knn_k}, embeddings.cols()};
    }
    case RegressorKind::kTree:
      return {fit_tree(embeddings, scores), embeddings.cols()};
    case RegressorKind::kSvr:
      return {fit_svr(embeddings, scores, params), embeddings.cols()};
  }
  throw ParameterError("unknown regressor kind");
}

inline std::vector<double> predict_scores(const RegressorModel& model, const Matrix& embeddings,
                                          bool clamp = false) {
  if (embeddings.cols() != model.dimension()) {
    throw ShapeError("embedding dimension " + std::to_string(embeddings.cols()) +
                     " does not match the model's " + std::to_string(model.dimension()));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(embeddings.rows()));
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    double v = model.predict(embeddings.row(i).transpose());
    if (clamp) v = std::clamp(v, kMinScore, kMaxScore);
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(i, c) = data.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace detail

inline nlohmann::json RegressorModel::to_json() const {
  nlohmann::json j = {{"format", "taxo-regressor"}, {"version", 1},
                      {"kind", to_string(kind())}, {"dimension", dimension_}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OlsModel>) {
          j["coefficients"] = detail::vector_to_json(m.coefficients);
          j["intercept"] = m.intercept;
          j["rank"] = m.rank;
          j["rank_deficient"] = m.rank_deficient;
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          j["k"] = m.k;
          j["train"] = detail::matrix_to_json(m.train);
          j["targets"] = detail::vector_to_json(m.targets);
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          nlohmann::json nodes = nlohmann::json::array();
          for (const TreeNode& n : m.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
          }
          j["nodes"] = std::move(nodes);
        } else {
          j["support"] = detail::matrix_to_json(m.support);
          j["coef"] = detail::vector_to_json(m.coef);
          j["rho"] = m.rho;
          j["gamma"] = m.gamma;
          j["epsilon"] = m.epsilon;
          j["C"] = m.C;
        }
      },
      model_);
  return j;
}

inline RegressorModel RegressorModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "taxo-regressor" || j.value("version", 0) != 1) {
    throw ValueError("not a version-1 regressor artifact");
  }
  const auto dimension = j.at("dimension").get<Eigen::Index>();
  switch (parse_regressor_kind(j.at("kind").get<std::string>())) {
    case RegressorKind::kOls: {
      OlsModel m;
      m.coefficients = detail::vector_from_json(j.at("coefficients"));
      m.intercept = j.at("intercept").get<double>();
      m.rank = j.at("rank").get<Eigen::Index>();
      m.rank_deficient = j.at("rank_deficient").get<bool>();
      return {std::move(m), dimension};
    }
    case RegressorKind::kKnn:
      return {KnnModel{detail::matrix_from_json(j.at("train")),
                       detail::vector_from_json(j.at("targets")), j.at("k").get<int>()},
              dimension};
    case RegressorKind::kTree: {
      TreeModel m;
      for (const auto& n : j.at("nodes")) {
        m.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                           n.at(3).get<int>(), n.at(4).get<double>()});
      }
      return {std::move(m), dimension};
    }
    case RegressorKind::kSvr: {
      SvrModel m;
      m.support = detail::matrix_from_json(j.at("support"));
      m.coef = detail::vector_from_json(j.at("coef"));
      m.rho = j.at("rho").get<double>();
      m.gamma = j.at("gamma").get<double>();
      m.epsilon = j.at("epsilon").get<double>();
      m.C = j.at("C").get<double>();
      return {std::move(m), dimension};
    }
  }
  throw ValueError("unknown regressor kind");
}

}  // namespace taxo

#endif  // TAXO_REGRESSORS_HPP_
