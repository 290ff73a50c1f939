#include "tcof/classify.hpp"

#include "tcof/error.hpp"
#include "tcof/lbptop.hpp"
#include "tcof/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

namespace tcof {

void LabeledFeatureSet::validate() const {
  const auto m = static_cast<std::size_t>(features.rows());
  if (labels.size() != m) throw ConfigError("feature set: label count does not match row count");
  if (!ids.empty() && ids.size() != m) throw ConfigError("feature set: id count does not match row count");
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_names.size()) {
      throw ConfigError("feature set: label " + std::to_string(label) + " outside [0, " +
                        std::to_string(class_names.size()) + ")");
    }
  }
  if (!features.allFinite()) throw NumericError("feature set: non-finite feature values");
}

LabeledFeatureSet LabeledFeatureSet::subset(std::span<const int> rows) const {
  LabeledFeatureSet out;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
    if (!ids.empty()) out.ids.push_back(ids[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

std::string to_string(Metric metric) { return metric == Metric::chi2 ? "chi2" : "euclidean"; }

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "chi2") return Metric::chi2;
  throw ConfigError("unknown metric '" + std::string(text) + "' (expected euclidean, chi2)");
}

double distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                Metric metric) {
  if (metric == Metric::chi2) return chi2_distance(a, b);
  return (a - b).squaredNorm();
}

int nn_classify(const LabeledFeatureSet& train, const Eigen::Ref<const Eigen::VectorXd>& query, Metric metric) {
  if (train.size() == 0) throw ConfigError("nn_classify: empty training set");
  if (query.size() != train.features.cols()) throw ShapeError("nn_classify: query length mismatch");
  Eigen::Index best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < train.size(); ++i) {
    const double d = distance(train.features.row(i).transpose(), query, metric);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return train.labels[static_cast<std::size_t>(best)];
}

namespace {

// Dual C-SVC with a linear kernel:
//   min 1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,  Q_ij = y_i y_j K_ij
// solved two coordinates at a time on the maximal violating pair.
BinaryMachine train_binary(const LabeledFeatureSet& data, const Eigen::MatrixXd& gram, std::vector<int> rows,
                           int positive, int negative, const SvmConfig& cfg) {
  const std::size_t n = rows.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[static_cast<std::size_t>(rows[i])] == positive ? 1.0 : -1.0;
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram(rows[i], rows[j]); };

  const double c = cfg.c;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };
  constexpr double kTau = 1e-12;

  long iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    std::size_t i = n, j = n;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double score = -y[t] * grad[t];
      if (in_up(t) && score > up_max) {
        up_max = score;
        i = t;
      }
      if (in_low(t) && score < low_min) {
        low_min = score;
        j = t;
      }
    }
    if (i == n || j == n || up_max - low_min < cfg.tolerance) break;

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }
  if (iter >= cfg.max_iterations) {
    throw NumericError("svm: no convergence after " + std::to_string(cfg.max_iterations) + " iterations");
  }

  // Bias from free support vectors, or the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity(), lower = -upper, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;

  BinaryMachine machine;
  machine.positive = positive;
  machine.negative = negative;
  machine.w = Eigen::VectorXd::Zero(data.features.cols());
  machine.alpha.resize(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    machine.alpha[static_cast<Eigen::Index>(t)] = alpha[t];
    if (alpha[t] > 0) machine.w += (alpha[t] * y[t]) * data.features.row(rows[t]).transpose();
  }
  machine.b = -rho;
  machine.rows = std::move(rows);
  machine.iterations = iter;
  return machine;
}

}  // namespace

SvmModel svm_train_rows(const LabeledFeatureSet& data, std::span<const int> rows, const Eigen::MatrixXd& gram,
                        const SvmConfig& cfg) {
  if (!(cfg.c > 0.0)) throw ConfigError("svm: C must be positive");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("svm: tolerance must be positive");
  std::set<int> present;
  for (int r : rows) present.insert(data.labels[static_cast<std::size_t>(r)]);
  if (present.size() < 2) throw ConfigError("svm: training data needs at least two classes");

  SvmModel model;
  model.class_names = data.class_names;
  const std::vector<int> classes(present.begin(), present.end());
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      std::vector<int> pair_rows;
      for (int r : rows) {
        const int label = data.labels[static_cast<std::size_t>(r)];
        if (label == classes[a] || label == classes[b]) pair_rows.push_back(r);
      }
      model.machines.push_back(train_binary(data, gram, std::move(pair_rows), classes[a], classes[b], cfg));
    }
  }
  return model;
}

SvmModel svm_train(const LabeledFeatureSet& train, const SvmConfig& cfg) {
  train.validate();
  const Eigen::MatrixXd gram = train.features * train.features.transpose();
  std::vector<int> rows(static_cast<std::size_t>(train.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return svm_train_rows(train, rows, gram, cfg);
}

int svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
  if (model.machines.empty()) throw ConfigError("svm_predict: empty model");
  const std::size_t k = model.class_names.size();
  std::vector<int> votes(k, 0);
  std::vector<double> score(k, 0.0);
  for (const auto& m : model.machines) {
    if (m.w.size() != query.size()) throw ShapeError("svm_predict: query length mismatch");
    const double dec = m.decision(query);
    ++votes[static_cast<std::size_t>(dec > 0 ? m.positive : m.negative)];
    score[static_cast<std::size_t>(m.positive)] += dec;
    score[static_cast<std::size_t>(m.negative)] -= dec;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && score[c] > score[best])) best = c;
  }
  return static_cast<int>(best);
}

double kkt_violation(const BinaryMachine& machine, const LabeledFeatureSet& data, double c) {
  double worst = 0.0;
  for (std::size_t t = 0; t < machine.rows.size(); ++t) {
    const int row = machine.rows[t];
    const double y = data.labels[static_cast<std::size_t>(row)] == machine.positive ? 1.0 : -1.0;
    const double margin = y * machine.decision(data.features.row(row).transpose());
    const double a = machine.alpha[static_cast<Eigen::Index>(t)];
    double v = 0.0;
    if (a <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (a >= c) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::string classifier_name(const Classifier& classifier) {
  if (std::holds_alternative<LinearSvm>(classifier)) return "svm";
  return "nn-" + to_string(std::get<NearestNeighbor>(classifier).metric);
}

std::vector<Fold> loo_folds(int m) {
  std::vector<Fold> folds(static_cast<std::size_t>(std::max(m, 0)));
  for (int i = 0; i < m; ++i) {
    auto& fold = folds[static_cast<std::size_t>(i)];
    fold.test = i;
    fold.train.reserve(static_cast<std::size_t>(m - 1));
    for (int j = 0; j < m; ++j) {
      if (j != i) fold.train.push_back(j);
    }
  }
  return folds;
}

EvalReport make_report(std::vector<std::string> class_names, std::vector<std::string> ids, std::vector<int> truth,
                       std::vector<int> predicted) {
  if (truth.size() != predicted.size()) throw ConfigError("report: truth/prediction count mismatch");
  const auto k = static_cast<Eigen::Index>(class_names.size());
  EvalReport r;
  r.confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion(truth[i], predicted[i]);
  const int m = static_cast<int>(truth.size());
  r.overall_accuracy = m ? 100.0 * r.confusion.trace() / m : 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const int total = r.confusion.row(c).sum();
    r.per_category_accuracy.push_back(total ? 100.0 * r.confusion(c, c) / total : 0.0);
  }
  r.class_names = std::move(class_names);
  r.ids = std::move(ids);
  r.truth = std::move(truth);
  r.predicted = std::move(predicted);
  return r;
}

EvalReport loo_evaluate(const LabeledFeatureSet& data, const Classifier& classifier, std::size_t workers,
                        const std::function<void(const Fold&)>& on_fold) {
  data.validate();
  const int m = static_cast<int>(data.size());
  if (m < 2) throw ConfigError("loo_evaluate: need at least two samples");

  const auto folds = loo_folds(m);
  for (const auto& fold : folds) {
    // The held-out sample must never reach its own training set.
    const bool leaked = std::find(fold.train.begin(), fold.train.end(), fold.test) != fold.train.end() ||
                        (!data.ids.empty() && std::any_of(fold.train.begin(), fold.train.end(), [&](int r) {
                          return data.ids[static_cast<std::size_t>(r)] == data.ids[static_cast<std::size_t>(fold.test)];
                        }));
    if (leaked) throw ConfigError("loo_evaluate: fold " + std::to_string(fold.test) + " leaks its test sample");
    if (on_fold) on_fold(fold);
  }

  const auto* svm = std::get_if<LinearSvm>(&classifier);
  Eigen::MatrixXd gram;
  if (svm) gram = data.features * data.features.transpose();

  std::vector<int> predicted(static_cast<std::size_t>(m));
  parallel_for(folds.size(), workers, [&](std::size_t f) {
    const Fold& fold = folds[f];
    const Eigen::VectorXd query = data.features.row(fold.test).transpose();
    if (!svm) {
      predicted[f] = nn_classify(data.subset(fold.train), query, std::get<NearestNeighbor>(classifier).metric);
      return;
    }
    std::set<int> present;
    for (int r : fold.train) present.insert(data.labels[static_cast<std::size_t>(r)]);
    if (present.size() < data.class_names.size()) {
      std::cerr << "warning: LOO fold " << fold.test << " trains without " << data.class_names.size() - present.size()
                << " class(es)\n";
    }
    if (present.size() == 1) {
      predicted[f] = *present.begin();
      return;
    }
    predicted[f] = svm_predict(svm_train_rows(data, fold.train, gram, svm->config), query);
  });

  return make_report(data.class_names, data.ids, data.labels, std::move(predicted));
}

}  // namespace tcof
