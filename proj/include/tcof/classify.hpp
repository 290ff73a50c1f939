#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tcof {

// M samples (rows) of dimension D with class indices into class_names.
struct LabeledFeatureSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> ids;

  Eigen::Index size() const noexcept { return features.rows(); }
  void validate() const;
  // Rows `rows`, keeping class names.
  LabeledFeatureSet subset(std::span<const int> rows) const;
};

enum class Metric { euclidean, chi2 };

std::string to_string(Metric metric);
Metric parse_metric(std::string_view text);

double distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                Metric metric);

// Label of the nearest training row; ties go to the lowest row index.
int nn_classify(const LabeledFeatureSet& train, const Eigen::Ref<const Eigen::VectorXd>& query, Metric metric);

struct SvmConfig {
  double c = 40.0;
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

// Soft-margin linear machine separating `positive` (y = +1) from `negative`.
struct BinaryMachine {
  int positive = 0;
  int negative = 1;
  Eigen::VectorXd w;
  double b = 0.0;
  // Dual solution over the training rows this machine saw.
  std::vector<int> rows;
  Eigen::VectorXd alpha;
  long iterations = 0;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return w.dot(x) + b; }
};

// One-vs-one ensemble: a machine for every pair of classes present in training.
struct SvmModel {
  std::vector<BinaryMachine> machines;
  std::vector<std::string> class_names;
};

SvmModel svm_train(const LabeledFeatureSet& train, const SvmConfig& cfg);

// Same as svm_train on rows `rows` of `data`, reusing a precomputed Gram
// matrix of all rows of `data`.
SvmModel svm_train_rows(const LabeledFeatureSet& data, std::span<const int> rows, const Eigen::MatrixXd& gram,
                        const SvmConfig& cfg);

// Max-wins voting; ties by largest summed decision value, then lowest index.
int svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

// Largest KKT violation of `machine` measured from w and b on its training
// rows of `data`:
//   alpha = 0      needs margin >= 1
//   0 < alpha < C  needs margin == 1
//   alpha = C      needs margin <= 1
double kkt_violation(const BinaryMachine& machine, const LabeledFeatureSet& data, double c);

struct NearestNeighbor {
  Metric metric = Metric::euclidean;
};
struct LinearSvm {
  SvmConfig config;
};
using Classifier = std::variant<NearestNeighbor, LinearSvm>;

std::string classifier_name(const Classifier& classifier);

struct Fold {
  std::vector<int> train;
  int test = 0;
};

std::vector<Fold> loo_folds(int m);

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<std::string> ids;
  std::vector<int> truth;
  std::vector<int> predicted;
  double overall_accuracy = 0.0;               // percent
  std::vector<double> per_category_accuracy;   // percent
  Eigen::MatrixXi confusion;                   // rows: truth, cols: predicted
};

EvalReport make_report(std::vector<std::string> class_names, std::vector<std::string> ids, std::vector<int> truth,
                       std::vector<int> predicted);

// Leave-one-out: fold i trains on every other row and predicts row i. Folds
// run on up to `workers` threads; the report does not depend on the count.
// `on_fold`, when set, sees every fold before training.
EvalReport loo_evaluate(const LabeledFeatureSet& data, const Classifier& classifier, std::size_t workers = 1,
                        const std::function<void(const Fold&)>& on_fold = {});

}  // namespace tcof
