#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "secflow/datagen.hpp"
#include "secflow/serialize.hpp"

namespace secflow {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> proba;  // leaf only; indexed like DetectorModel::classes()
};

/// Binary CART tree: x[feature] <= threshold goes left.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<double>& leaf_proba(std::span<const double> x) const;
  /// Argmax of the leaf distribution; ties go to the lower class index.
  std::size_t vote(std::span<const double> x) const;

 private:
  std::vector<TreeNode> nodes_;
};

enum class DetectorKind { RandomForest, Linear };
std::string_view to_string(DetectorKind kind);

struct ForestParams {
  std::size_t n_trees = 50;
  std::size_t max_depth = 10;
  std::size_t min_leaf = 2;
};

class DetectorModel {
 public:
  DetectorKind kind() const { return kind_; }
  DatasetKind schema() const { return schema_; }
  std::size_t feature_count() const { return n_features_; }
  /// Classes seen in training, in label declaration order.
  const std::vector<Label>& classes() const { return classes_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Throws Prediction on a feature-count mismatch.
  Label predict(std::span<const double> features) const;
  /// Per-class tallies of individual tree votes (forest only).
  std::vector<std::size_t> votes(std::span<const double> features) const;
  /// Per-class one-vs-rest scores (linear only).
  std::vector<double> scores(std::span<const double> features) const;

  /// Same model with trees in a different order (forest only).
  DetectorModel with_tree_order(const std::vector<std::size_t>& order) const;

  Json to_json() const;
  static DetectorModel from_json(const Json& doc);

 private:
  friend DetectorModel train_random_forest(const Dataset&, const ForestParams&, std::uint64_t);
  friend DetectorModel train_linear(const Dataset&, double);

  void check_arity(std::span<const double> features) const;

  DetectorKind kind_ = DetectorKind::RandomForest;
  DatasetKind schema_ = DatasetKind::NTD;
  std::size_t n_features_ = 0;
  std::vector<Label> classes_;
  std::vector<DecisionTree> trees_;
  // Linear: inputs are standardised with (x - mean) / scale, then
  // score_c = weights[c][0] + sum_f weights[c][f + 1] * z_f.
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<std::vector<double>> weights_;
};

/// Bagged Gini trees with floor(sqrt(d)) random candidate features per split.
/// Deterministic given the seed; each tree draws from its own derived stream.
/// Throws Training on an empty dataset or n_trees == 0.
DetectorModel train_random_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed);

/// One-vs-rest ridge least squares, prediction by argmax score.
/// Throws Training when the normal equations stay singular.
DetectorModel train_linear(const Dataset& train, double ridge = 1e-6);

struct DetectionMetrics {
  double accuracy = 0.0;
  std::array<double, kLabelCount> f1{};
  std::array<double, kLabelCount> far{};      // Normal entry unused (0)
  std::array<double, kLabelCount> recall{};
  std::array<std::size_t, kLabelCount> support{};
};

/// Metrics over a confusion matrix of (truth, prediction) pairs.
DetectionMetrics metrics_from_predictions(std::span<const Label> truth, std::span<const Label> predicted);

/// Throws Evaluation when the dataset schema does not match the model.
DetectionMetrics evaluate(const DetectorModel& model, const Dataset& test);

}  // namespace secflow
