#include "secflow/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "secflow/errors.hpp"
#include "secflow/rng.hpp"

namespace secflow {

const std::vector<double>& DecisionTree::leaf_proba(std::span<const double> x) const {
  std::size_t node = 0;
  while (nodes_[node].feature >= 0) {
    const TreeNode& n = nodes_[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[node].proba;
}

std::size_t DecisionTree::vote(std::span<const double> x) const {
  const auto& p = leaf_proba(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::string_view to_string(DetectorKind kind) {
  return kind == DetectorKind::RandomForest ? "random_forest" : "linear";
}

// ---------------------------------------------------------------------------
// Forest training
// ---------------------------------------------------------------------------

namespace {

struct TrainingMatrix {
  std::size_t n_features = 0;
  std::vector<double> x;       // row-major
  std::vector<std::size_t> y;  // class index
  double at(std::size_t row, std::size_t f) const { return x[row * n_features + f]; }
};

std::vector<Label> present_classes(const Dataset& ds) {
  std::array<bool, kLabelCount> seen{};
  for (const auto& r : ds.records) seen[index_of(r.label)] = true;
  std::vector<Label> out;
  for (Label l : kAllLabels) {
    if (seen[index_of(l)]) out.push_back(l);
  }
  return out;
}

TrainingMatrix to_matrix(const Dataset& ds, const std::vector<Label>& classes) {
  TrainingMatrix m;
  m.n_features = ds.feature_names.size();
  m.x.reserve(ds.size() * m.n_features);
  std::array<std::size_t, kLabelCount> class_index{};
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[index_of(classes[c])] = c;
  for (const auto& r : ds.records) {
    if (r.features.size() != m.n_features) fail(ErrorCode::Training, "record arity does not match the schema");
    m.x.insert(m.x.end(), r.features.begin(), r.features.end());
    m.y.push_back(class_index[index_of(r.label)]);
  }
  return m;
}

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingMatrix& m, std::size_t n_classes, const ForestParams& params, Rng& rng)
      : m_(m), n_classes_(n_classes), params_(params), rng_(rng) {
    mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m.n_features)))));
    feature_pool_.resize(m.n_features);
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::vector<std::size_t> counts(n_classes_, 0);
    for (std::size_t r : rows) ++counts[m_.y[r]];
    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;

    Split best;
    if (!pure && depth < params_.max_depth && rows.size() >= 2 * params_.min_leaf) best = find_split(rows, counts);

    if (!best.valid) {
      auto& leaf = nodes_[static_cast<std::size_t>(id)];
      leaf.proba.resize(n_classes_);
      for (std::size_t c = 0; c < n_classes_; ++c) {
        leaf.proba[c] = static_cast<double>(counts[c]) / static_cast<double>(rows.size());
      }
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) (m_.at(r, best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Splits are accepted whenever the node is impure and a split honouring
  // min_leaf exists, even at zero Gini gain; XOR-like structure needs that.
  Split find_split(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& counts) {
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, feature_pool_.size() - 1);
      std::swap(feature_pool_[k], feature_pool_[pick(rng_)]);
    }
    Split best;
    std::vector<std::pair<double, std::size_t>> sorted(rows.size());
    std::vector<std::size_t> left_counts(n_classes_);
    std::vector<std::size_t> right_counts(n_classes_);
    const std::size_t n = rows.size();
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t f = feature_pool_[k];
      for (std::size_t i = 0; i < n; ++i) sorted[i] = {m_.at(rows[i], f), m_.y[rows[i]]};
      std::sort(sorted.begin(), sorted.end());
      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left_counts[sorted[i].second];
        --right_counts[sorted[i].second];
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (sorted[i].first == sorted[i + 1].first) continue;
        if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;
        const double impurity = (static_cast<double>(n_left) * gini(left_counts, n_left) +
                                 static_cast<double>(n_right) * gini(right_counts, n_right)) /
                                static_cast<double>(n);
        if (!best.valid || impurity < best.impurity - 1e-12) {
          best.valid = true;
          best.feature = f;
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const TrainingMatrix& m_;
  std::size_t n_classes_;
  ForestParams params_;
  Rng& rng_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> feature_pool_;
  std::vector<TreeNode> nodes_;
};

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

DetectorModel train_random_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed) {
  if (train.records.empty()) fail(ErrorCode::Training, "cannot train on an empty dataset");
  if (params.n_trees == 0) fail(ErrorCode::Training, "a forest needs at least one tree");
  if (params.min_leaf == 0) fail(ErrorCode::Training, "min_leaf must be at least 1");

  DetectorModel model;
  model.kind_ = DetectorKind::RandomForest;
  model.schema_ = train.kind;
  model.n_features_ = train.feature_names.size();
  model.classes_ = present_classes(train);
  const TrainingMatrix m = to_matrix(train, model.classes_);

  const std::size_t n = train.size();
  model.trees_.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(derive_seed(seed, "forest"), t));
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = draw(rng);
    TreeBuilder builder(m, model.classes_.size(), params, rng);
    model.trees_.push_back(builder.build(std::move(rows)));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Linear training
// ---------------------------------------------------------------------------

DetectorModel train_linear(const Dataset& train, double ridge) {
  if (train.records.empty()) fail(ErrorCode::Training, "cannot train on an empty dataset");
  DetectorModel model;
  model.kind_ = DetectorKind::Linear;
  model.schema_ = train.kind;
  model.n_features_ = train.feature_names.size();
  model.classes_ = present_classes(train);
  const TrainingMatrix m = to_matrix(train, model.classes_);

  const std::size_t n = train.size();
  const std::size_t d = model.n_features_;
  model.mean_.assign(d, 0.0);
  model.scale_.assign(d, 1.0);
  for (std::size_t f = 0; f < d; ++f) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += m.at(r, f);
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (m.at(r, f) - mean) * (m.at(r, f) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.mean_[f] = mean;
    model.scale_[f] = sd > 1e-12 ? sd : 1.0;
  }

  const std::size_t k = model.classes_.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 1));
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    x(row, 0) = 1.0;
    for (std::size_t f = 0; f < d; ++f) {
      x(row, static_cast<Eigen::Index>(f + 1)) = (m.at(r, f) - model.mean_[f]) / model.scale_[f];
    }
    y(row, static_cast<Eigen::Index>(m.y[r])) = 1.0;
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success || !solver.isPositive() || solver.rcond() < 1e-15) {
    fail(ErrorCode::Training, "normal equations are numerically singular");
  }
  const Eigen::MatrixXd w = solver.solve(x.transpose() * y);
  if (!w.allFinite()) fail(ErrorCode::Training, "least-squares solution is not finite");

  model.weights_.assign(k, std::vector<double>(d + 1));
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f <= d; ++f) {
      model.weights_[c][f] = w(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

void DetectorModel::check_arity(std::span<const double> features) const {
  if (features.size() != n_features_) {
    fail(ErrorCode::Prediction, "expected " + std::to_string(n_features_) + " features, got " +
                                    std::to_string(features.size()));
  }
}

std::vector<std::size_t> DetectorModel::votes(std::span<const double> features) const {
  check_arity(features);
  std::vector<std::size_t> tally(classes_.size(), 0);
  for (const auto& tree : trees_) ++tally[tree.vote(features)];
  return tally;
}

std::vector<double> DetectorModel::scores(std::span<const double> features) const {
  check_arity(features);
  std::vector<double> out(classes_.size(), 0.0);
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    double s = weights_[c][0];
    for (std::size_t f = 0; f < n_features_; ++f) s += weights_[c][f + 1] * (features[f] - mean_[f]) / scale_[f];
    out[c] = s;
  }
  return out;
}

Label DetectorModel::predict(std::span<const double> features) const {
  if (kind_ == DetectorKind::RandomForest) {
    const auto tally = votes(features);
    return classes_[static_cast<std::size_t>(std::max_element(tally.begin(), tally.end()) - tally.begin())];
  }
  return classes_[argmax_first(scores(features))];
}

DetectorModel DetectorModel::with_tree_order(const std::vector<std::size_t>& order) const {
  if (order.size() != trees_.size()) fail(ErrorCode::InvalidArgument, "tree order has the wrong length");
  DetectorModel out = *this;
  for (std::size_t k = 0; k < order.size(); ++k) out.trees_[k] = trees_.at(order[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

namespace {

Json node_to_json(const std::vector<TreeNode>& nodes, std::size_t id) {
  const TreeNode& n = nodes[id];
  if (n.feature < 0) return Json{{"p", n.proba}};
  return Json{{"f", n.feature},
              {"t", n.threshold},
              {"l", node_to_json(nodes, static_cast<std::size_t>(n.left))},
              {"r", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

int node_from_json(const JsonCursor& cur, std::vector<TreeNode>& nodes, std::size_t n_classes,
                   std::size_t n_features) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (cur.has("p")) {
    JsonCursor p = cur.at("p");
    if (p.array_size() != n_classes) p.error("leaf distribution has the wrong length");
    std::vector<double> proba;
    double sum = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      proba.push_back(p.at(c).number());
      sum += proba.back();
    }
    if (std::abs(sum - 1.0) > 1e-9) p.error("leaf distribution does not sum to 1");
    nodes[static_cast<std::size_t>(id)].proba = std::move(proba);
    return id;
  }
  const double f = cur.at("f").number();
  if (f < 0 || f >= static_cast<double>(n_features)) cur.error("feature index out of range");
  const double t = cur.at("t").number();
  if (!std::isfinite(t)) cur.error("threshold must be finite");
  const int l = node_from_json(cur.at("l"), nodes, n_classes, n_features);
  const int r = node_from_json(cur.at("r"), nodes, n_classes, n_features);
  auto& node = nodes[static_cast<std::size_t>(id)];
  node.feature = static_cast<int>(f);
  node.threshold = t;
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

Json DetectorModel::to_json() const {
  Json classes = Json::array();
  for (Label l : classes_) classes.push_back(std::string(to_string(l)));
  Json doc{{"kind", std::string(to_string(kind_))},
           {"schema", std::string(to_string(schema_))},
           {"n_features", n_features_},
           {"classes", std::move(classes)}};
  if (kind_ == DetectorKind::RandomForest) {
    Json trees = Json::array();
    for (const auto& t : trees_) trees.push_back(node_to_json(t.nodes(), 0));
    doc["trees"] = std::move(trees);
  } else {
    doc["mean"] = mean_;
    doc["scale"] = scale_;
    doc["weights"] = weights_;
  }
  return doc;
}

DetectorModel DetectorModel::from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  DetectorModel m;
  const std::string kind = root.at("kind").string();
  if (kind == "random_forest") {
    m.kind_ = DetectorKind::RandomForest;
  } else if (kind == "linear") {
    m.kind_ = DetectorKind::Linear;
  } else {
    root.at("kind").error("unknown detector kind");
  }
  m.schema_ = parse_dataset_kind(root.at("schema").string());
  m.n_features_ = static_cast<std::size_t>(root.at("n_features").number());
  if (m.n_features_ != feature_names(m.schema_).size()) root.at("n_features").error("does not match the schema");
  JsonCursor classes = root.at("classes");
  for (std::size_t c = 0; c < classes.array_size(); ++c) m.classes_.push_back(parse_label(classes.at(c).string()));
  if (m.classes_.empty()) classes.error("needs at least one class");

  if (m.kind_ == DetectorKind::RandomForest) {
    JsonCursor trees = root.at("trees");
    if (trees.array_size() == 0) trees.error("a forest needs at least one tree");
    for (std::size_t t = 0; t < trees.array_size(); ++t) {
      std::vector<TreeNode> nodes;
      node_from_json(trees.at(t), nodes, m.classes_.size(), m.n_features_);
      m.trees_.emplace_back(std::move(nodes));
    }
  } else {
    m.mean_ = root.at("mean").node().get<std::vector<double>>();
    m.scale_ = root.at("scale").node().get<std::vector<double>>();
    m.weights_ = root.at("weights").node().get<std::vector<std::vector<double>>>();
    if (m.mean_.size() != m.n_features_ || m.scale_.size() != m.n_features_) root.error("linear scaling has the wrong length");
    if (m.weights_.size() != m.classes_.size()) root.at("weights").error("needs one weight vector per class");
    for (const auto& w : m.weights_) {
      if (w.size() != m.n_features_ + 1) root.at("weights").error("weight vector has the wrong length");
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

DetectionMetrics metrics_from_predictions(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorCode::Evaluation, "truth and predictions differ in length");
  std::array<std::array<std::size_t, kLabelCount>, kLabelCount> confusion{};
  for (std::size_t k = 0; k < truth.size(); ++k) ++confusion[index_of(truth[k])][index_of(predicted[k])];

  DetectionMetrics out;
  const std::size_t total = truth.size();
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kLabelCount; ++c) correct += confusion[c][c];
  out.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;

  for (std::size_t c = 0; c < kLabelCount; ++c) {
    std::size_t tp = confusion[c][c];
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t o = 0; o < kLabelCount; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    const std::size_t tn = total - tp - fp - fn;
    const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1[c] = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.recall[c] = recall;
    out.support[c] = tp + fn;
    if (c != index_of(Label::Normal)) out.far[c] = fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
  }
  return out;
}

DetectionMetrics evaluate(const DetectorModel& model, const Dataset& test) {
  if (test.kind != model.schema() || test.feature_names.size() != model.feature_count()) {
    fail(ErrorCode::Evaluation, "dataset schema '" + std::string(to_string(test.kind)) +
                                    "' does not match the model schema '" +
                                    std::string(to_string(model.schema())) + "'");
  }
  std::vector<Label> truth;
  std::vector<Label> predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  for (const auto& r : test.records) {
    truth.push_back(r.label);
    predicted.push_back(model.predict(r.features));
  }
  return metrics_from_predictions(truth, predicted);
}

}  // namespace secflow
