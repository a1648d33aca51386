#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrsqm/dataset.hpp"
#include "mrsqm/mining.hpp"
#include "mrsqm/symbolic.hpp"

namespace mrsqm {

// Binary presence design matrix, sparse by row: row_features[i] holds the
// sorted column ids whose subword occurs in series i.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::uint32_t>> row_features;
};

// Concatenates per-representation presence indicators. Column order is
// representation order, then feature order within each set.
FeatureMatrix featurize(const std::vector<std::vector<SymbolicSequence>>& per_rep_sequences,
                        const std::vector<FeatureSet>& per_rep_features);

struct TrainOptions {
  double reg_strength = 1.0; // larger means weaker L2 penalty
  double tol = 1e-4;         // stop when the gradient infinity norm drops below
  int max_iter = 1000;
};

// Multinomial logistic regression weights over the concatenated space.
struct LinearClassifier {
  int num_classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights; // num_classes x dim, row-major
  std::vector<double> intercepts;
  bool converged = true;
  int iterations = 0;
  std::vector<double> objective_trace; // objective after each accepted step
};

// L2-regularized multinomial negative log-likelihood and its gradient, in
// the packed parameter layout [weights, intercepts]. Exposed so tests can
// check the analytic gradient against finite differences.
double classifier_objective(const FeatureMatrix& x, const std::vector<int>& labels,
                            int num_classes, double reg_strength,
                            std::span<const double> params);
void classifier_gradient(const FeatureMatrix& x, const std::vector<int>& labels,
                         int num_classes, double reg_strength,
                         std::span<const double> params, std::span<double> grad);

// Deterministic batch L-BFGS with backtracking line search; the objective is
// non-increasing across iterations. Sets converged=false (weights still
// returned) if the tolerance is not reached within max_iter.
LinearClassifier train_classifier(const FeatureMatrix& x, const std::vector<int>& labels,
                                  int num_classes, const TrainOptions& options = {});

struct Representation {
  ReprConfig config;
  FeatureSet features;
};

enum class TransformMode { Sax, Sfa, Both };

std::string transform_mode_name(TransformMode mode);
TransformMode transform_mode_from_name(const std::string& name);

struct MrsqmModel {
  std::uint64_t seed = 42;
  TransformMode mode = TransformMode::Sfa;
  int sax_k = 0;
  int sfa_k = 5;
  SelectionStrategy strategy = SelectionStrategy::RandomChi2;
  int features_per_rep = 500;
  std::vector<std::string> classes;
  std::vector<Representation> representations;
  LinearClassifier classifier;
  std::string trained_at; // ISO-8601; the only field excluded from byte determinism

  std::size_t total_features() const;
  int max_window() const;
};

struct Prediction {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> probabilities; // rows sum to 1
};

// Applies every stored representation to the dataset, featurizes, and scores.
// Ties pick the lowest class index.
Prediction predict(const MrsqmModel& model, const TimeSeriesDataset& dataset);

// Versioned text model file; save/load round-trips weights and bin edges
// exactly, so predictions before and after are bit-identical.
void save_model(const MrsqmModel& model, const std::filesystem::path& path);
MrsqmModel load_model(const std::filesystem::path& path);

struct FitOptions {
  TransformMode mode = TransformMode::Sfa;
  int sax_k = 0; // representations per transform: ceil(k * log2(L))
  int sfa_k = 5;
  SelectionStrategy strategy = SelectionStrategy::RandomChi2;
  int features_per_rep = 500;
  std::uint64_t seed = 42;
  bool numerosity_reduction = true;
  bool drop_dc = false;
  TrainOptions train;
};

struct FitReport {
  std::size_t num_representations = 0;
  std::size_t total_features = 0;
  double train_accuracy = 0.0;
  double transform_seconds = 0.0;
  double mining_seconds = 0.0;
  double training_seconds = 0.0;
};

// Full pipeline: sample configurations, transform, select features per
// representation, train the classifier on the concatenated feature space.
MrsqmModel fit(const TimeSeriesDataset& dataset, const FitOptions& options,
               FitReport* report = nullptr);

} // namespace mrsqm
