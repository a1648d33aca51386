#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mrsqm/common.hpp"
#include "mrsqm/model.hpp"
#include "test_support.hpp"

using namespace mrsqm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mrsqm_model_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

FeatureMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double density) {
  FeatureMatrix x;
  x.rows = rows;
  x.cols = cols;
  x.row_features.resize(rows);
  for (auto& row : x.row_features)
    for (std::uint32_t j = 0; j < cols; ++j)
      if (rng.uniform_real() < density) row.push_back(j);
  return x;
}

std::string strip_timestamp_line(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("trained_at") == std::string::npos) out << line << '\n';
  return out.str();
}

FitOptions quick_fit_options() {
  FitOptions opt;
  opt.mode = TransformMode::Sfa;
  opt.sfa_k = 1;
  opt.features_per_rep = 60;
  opt.seed = 42;
  return opt;
}

} // namespace

TEST_CASE("featurize marks substring presence per representation") {
  std::vector<std::vector<SymbolicSequence>> seqs{{{"aab", "bcc"}, {"bbb"}}};
  FeatureSet fs;
  fs.subwords = {"ab", "zz", "bb"};
  const FeatureMatrix x = featurize(seqs, {fs});
  CHECK(x.rows == 2);
  CHECK(x.cols == 3);
  CHECK(x.row_features[0] == std::vector<std::uint32_t>{0}); // "ab" in "aab"
  CHECK(x.row_features[1] == std::vector<std::uint32_t>{2}); // "bb" in "bbb"
}

TEST_CASE("featurize concatenates representations in order and is monotone") {
  std::vector<std::vector<SymbolicSequence>> seqs{
      {{"ab"}, {"ba"}},
      {{"cc"}, {"cd"}},
  };
  FeatureSet first;
  first.subwords = {"ab"};
  FeatureSet second;
  second.subwords = {"cd", "cc"};
  const FeatureMatrix x = featurize(seqs, {first, second});
  CHECK(x.cols == 3);
  CHECK(x.row_features[0] == std::vector<std::uint32_t>{0, 2});
  CHECK(x.row_features[1] == std::vector<std::uint32_t>{1});

  // adding a column leaves existing ones unchanged
  FeatureSet wider = second;
  wider.subwords.push_back("d");
  const FeatureMatrix x2 = featurize(seqs, {first, wider});
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::uint32_t col : x.row_features[i])
      CHECK(std::count(x2.row_features[i].begin(), x2.row_features[i].end(), col) == 1);

  CHECK_THROWS_AS(featurize(seqs, {first}), std::invalid_argument);
}

TEST_CASE("training-matrix column sums equal the miner's document frequencies") {
  Rng rng(13);
  auto [sequences, labels] = testsupport::random_symbolic_dataset(rng, 20, 3, 8, 2);
  const FeatureSet fs = select_supervised(sequences, labels, 2, 15);

  const FeatureMatrix x = featurize({sequences}, {fs});
  std::vector<std::int64_t> column_sums(x.cols, 0);
  for (const auto& row : x.row_features)
    for (std::uint32_t j : row) ++column_sums[j];

  REQUIRE(fs.doc_counts.size() == fs.subwords.size());
  for (std::size_t j = 0; j < fs.subwords.size(); ++j) {
    std::int64_t total = 0;
    for (std::int64_t c : fs.doc_counts[j]) total += c;
    CHECK(column_sums[j] == total);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = 5 + rng.uniform_index(30);
    const std::size_t cols = 2 + rng.uniform_index(12);
    const int classes = 2 + static_cast<int>(rng.uniform_index(3));
    const FeatureMatrix x = random_matrix(rng, rows, cols, 0.3);
    std::vector<int> labels(rows);
    for (std::size_t i = 0; i < rows; ++i)
      labels[i] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(classes)));
    labels[0] = 0;
    labels[1] = 1;

    const std::size_t n = cols * static_cast<std::size_t>(classes) +
                          static_cast<std::size_t>(classes);
    std::vector<double> params(n);
    for (double& p : params) p = 0.5 * rng.normal();

    std::vector<double> analytic(n);
    classifier_gradient(x, labels, classes, 1.0, params, analytic);

    const double h = 1e-5;
    double num_sq = 0.0, diff_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> plus = params, minus = params;
      plus[i] += h;
      minus[i] -= h;
      const double numeric = (classifier_objective(x, labels, classes, 1.0, plus) -
                              classifier_objective(x, labels, classes, 1.0, minus)) /
                             (2.0 * h);
      num_sq += analytic[i] * analytic[i];
      diff_sq += (analytic[i] - numeric) * (analytic[i] - numeric);
    }
    REQUIRE(num_sq > 0.0);
    CHECK(std::sqrt(diff_sq) / std::sqrt(num_sq) < 1e-5);
  }
}

TEST_CASE("training separates a separable toy exactly") {
  FeatureMatrix x;
  x.rows = 8;
  x.cols = 2;
  x.row_features.resize(8);
  std::vector<int> labels(8);
  for (std::size_t i = 0; i < 8; ++i) {
    labels[i] = i % 2;
    x.row_features[i] = {static_cast<std::uint32_t>(i % 2)};
  }
  const LinearClassifier clf = train_classifier(x, labels, 2);
  CHECK(clf.converged);

  // training accuracy 1.0
  for (std::size_t i = 0; i < 8; ++i) {
    const std::uint32_t j = x.row_features[i][0];
    const double s0 = clf.weights[j] + clf.intercepts[0];
    const double s1 = clf.weights[x.cols + j] + clf.intercepts[1];
    CHECK((labels[i] == 0 ? s0 > s1 : s1 > s0));
  }
}

TEST_CASE("all-zero design matrix learns the class prior") {
  FeatureMatrix x;
  x.rows = 10;
  x.cols = 3;
  x.row_features.resize(10);
  std::vector<int> labels{0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
  const LinearClassifier clf = train_classifier(x, labels, 2);
  REQUIRE(clf.converged);

  const double z0 = std::exp(clf.intercepts[0]);
  const double z1 = std::exp(clf.intercepts[1]);
  CHECK(z0 / (z0 + z1) == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(z1 / (z0 + z1) == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("optimizer contract: gradient below tol, objective non-increasing") {
  Rng rng(15);
  const FeatureMatrix x = random_matrix(rng, 40, 20, 0.25);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 3);

  TrainOptions opt;
  opt.tol = 1e-6;
  const LinearClassifier clf = train_classifier(x, labels, 3, opt);
  REQUIRE(clf.converged);

  std::vector<double> params = clf.weights;
  params.insert(params.end(), clf.intercepts.begin(), clf.intercepts.end());
  std::vector<double> grad(params.size());
  classifier_gradient(x, labels, 3, opt.reg_strength, params, grad);
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  CHECK(gmax < opt.tol);

  for (std::size_t i = 1; i < clf.objective_trace.size(); ++i)
    CHECK(clf.objective_trace[i] <= clf.objective_trace[i - 1] + 1e-12);

  CHECK_THROWS_AS(train_classifier(x, std::vector<int>(40, 0), 3), std::invalid_argument);
  CHECK_THROWS_AS(train_classifier(x, labels, 1), std::invalid_argument);
}

TEST_CASE("fit/predict on separable synthetic data") {
  const TimeSeriesDataset train = testsupport::synthetic_dataset(12, 64, 100);
  const TimeSeriesDataset test = testsupport::synthetic_dataset(8, 64, 200);

  FitReport report;
  const MrsqmModel model = fit(train, quick_fit_options(), &report);
  CHECK(report.num_representations == num_representations(64, 1));
  CHECK(report.total_features == model.total_features());
  CHECK(report.train_accuracy == 1.0);

  const Prediction on_train = predict(model, train);
  CHECK(testsupport::accuracy(on_train.labels, train.labels) == 1.0);

  const Prediction on_test = predict(model, test);
  CHECK(testsupport::accuracy(on_test.labels, test.labels) >= 0.9);

  for (const auto& row : on_test.probabilities) {
    double total = 0.0;
    for (double p : row) total += p;
    CHECK(std::abs(total - 1.0) < 1e-9);
  }

  // identical series give identical predictions
  TimeSeriesDataset twice;
  twice.series = {test.series[0], test.series[0]};
  const Prediction dup = predict(model, twice);
  CHECK(dup.labels[0] == dup.labels[1]);
  CHECK(dup.probabilities[0] == dup.probabilities[1]);

  // series shorter than the largest window: error names the window
  TimeSeriesDataset tiny;
  tiny.series = {{1.0, 2.0, 3.0}};
  CHECK_THROWS_WITH_AS(predict(model, tiny),
                       doctest::Contains(std::to_string(model.max_window()).c_str()),
                       std::invalid_argument);
}

TEST_CASE("every selection strategy runs end to end") {
  const TimeSeriesDataset train = testsupport::synthetic_dataset(10, 64, 300);
  for (SelectionStrategy strategy :
       {SelectionStrategy::Random, SelectionStrategy::Supervised,
        SelectionStrategy::RandomChi2, SelectionStrategy::SupervisedRandom}) {
    FitOptions opt = quick_fit_options();
    opt.strategy = strategy;
    opt.features_per_rep = 40;
    const MrsqmModel model = fit(train, opt);
    const Prediction pred = predict(model, train);
    CHECK(testsupport::accuracy(pred.labels, train.labels) >= 0.9);
  }
}

TEST_CASE("model save/load round-trips predictions exactly") {
  TempDir tmp;
  const TimeSeriesDataset train = testsupport::synthetic_dataset(10, 64, 400);
  const TimeSeriesDataset test = testsupport::synthetic_dataset(6, 64, 500);

  FitOptions opt = quick_fit_options();
  opt.mode = TransformMode::Both;
  opt.sax_k = 1;
  opt.sfa_k = 1;
  FitReport report;
  const MrsqmModel model = fit(train, opt, &report);
  CHECK(report.num_representations == 2 * num_representations(64, 1));
  const Prediction before = predict(model, test);

  const fs::path path = tmp.path / "model.json";
  save_model(model, path);
  const MrsqmModel loaded = load_model(path);
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.mode == model.mode);
  CHECK(loaded.representations.size() == model.representations.size());
  for (std::size_t r = 0; r < model.representations.size(); ++r) {
    CHECK(loaded.representations[r].config.bins == model.representations[r].config.bins);
    CHECK(loaded.representations[r].features.subwords ==
          model.representations[r].features.subwords);
  }
  CHECK(loaded.classifier.weights == model.classifier.weights);
  CHECK(loaded.classifier.intercepts == model.classifier.intercepts);

  const Prediction after = predict(loaded, test);
  CHECK(after.labels == before.labels);
  CHECK(after.probabilities == before.probabilities);
}

TEST_CASE("model files are deterministic modulo the timestamp") {
  TempDir tmp;
  const TimeSeriesDataset train = testsupport::synthetic_dataset(8, 64, 600);
  const FitOptions opt = quick_fit_options();

  const fs::path p1 = tmp.path / "m1.json";
  const fs::path p2 = tmp.path / "m2.json";
  save_model(fit(train, opt), p1);
  save_model(fit(train, opt), p2);
  CHECK(strip_timestamp_line(p1) == strip_timestamp_line(p2));
}

TEST_CASE("a hand-written model file in the documented schema loads and predicts") {
  TempDir tmp;
  const fs::path path = tmp.path / "hand.json";
  {
    std::ofstream out(path);
    out << R"({
  "version": 1,
  "seed": 7,
  "transform": "both",
  "k": 1,
  "sax_k": 1,
  "sfa_k": 1,
  "strategy": "rs",
  "features_per_rep": 2,
  "trained_at": "2026-01-01T00:00:00Z",
  "classes": ["neg", "pos"],
  "representations": [
    {"transform": "sax", "l": 4, "w": 2, "alpha": 2,
     "numerosity_reduction": true, "drop_dc": false, "features": ["ab"]},
    {"transform": "sfa", "l": 4, "w": 2, "alpha": 2,
     "numerosity_reduction": true, "drop_dc": false,
     "bins": [[0.0], [0.0]], "features": ["ba", "aa"]}
  ],
  "weights": [[0.5, 1.0, -2.0], [-0.5, -1.0, 2.0]],
  "intercepts": [0.25, -0.25]
})";
  }
  const MrsqmModel model = load_model(path);
  CHECK(model.mode == TransformMode::Both);
  CHECK(model.total_features() == 3);

  // series A: one window, SAX word "ab" (rising ramp), SFA word "ba"
  // (positive DC, zero imaginary) -> columns {0, 1}:
  //   s_neg = 0.5 + 1.0 + 0.25 = 1.75, s_pos = -1.75
  // series B: falling DC sign flips the SFA word to "aa" -> columns {0, 2}:
  //   s_neg = 0.5 - 2.0 + 0.25 = -1.25, s_pos = 1.25
  TimeSeriesDataset data;
  data.series = {{1, 2, 3, 4}, {-4, -3, -2, -1}};
  const Prediction pred = predict(model, data);
  REQUIRE(pred.labels.size() == 2);
  CHECK(pred.labels[0] == "neg");
  CHECK(pred.labels[1] == "pos");
  CHECK(pred.probabilities[0][0] ==
        doctest::Approx(1.0 / (1.0 + std::exp(-3.5))).epsilon(1e-12));
  CHECK(pred.probabilities[1][1] ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.5))).epsilon(1e-12));
}

TEST_CASE("score ties resolve to the lowest class index") {
  MrsqmModel model;
  model.classes = {"neg", "pos"};
  Representation rep;
  rep.config.transform = TransformKind::Sax;
  rep.config.window_len = 4;
  rep.config.word_len = 2;
  rep.config.alphabet = 2;
  rep.features.subwords = {"ab"};
  model.representations = {rep};
  model.classifier.num_classes = 2;
  model.classifier.dim = 1;
  model.classifier.weights = {0.0, 0.0};
  model.classifier.intercepts = {0.0, 0.0};

  TimeSeriesDataset data;
  data.series = {{1, 2, 3, 4}};
  const Prediction pred = predict(model, data);
  CHECK(pred.labels[0] == "neg");
  CHECK(pred.probabilities[0][0] == 0.5);
  CHECK(pred.probabilities[0][1] == 0.5);
}

TEST_CASE("model file error paths") {
  TempDir tmp;
  const TimeSeriesDataset train = testsupport::synthetic_dataset(8, 64, 700);
  const MrsqmModel model = fit(train, quick_fit_options());
  const fs::path path = tmp.path / "model.json";
  save_model(model, path);

  SUBCASE("truncated file is a parse error") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(tmp.path / "cut.json");
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(load_model(tmp.path / "cut.json"), ParseError);
  }

  SUBCASE("unknown version is a version error") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    std::ofstream out(tmp.path / "v2.json");
    out << text;
    out.close();
    CHECK_THROWS_AS(load_model(tmp.path / "v2.json"), VersionError);
  }

  SUBCASE("missing file is a parse error") {
    CHECK_THROWS_AS(load_model(tmp.path / "absent.json"), ParseError);
  }

  SUBCASE("models without representations cannot be saved") {
    MrsqmModel empty = model;
    empty.representations.clear();
    CHECK_THROWS_AS(save_model(empty, tmp.path / "never.json"), std::invalid_argument);
  }
}

TEST_CASE("fit validates its inputs") {
  TimeSeriesDataset one_class;
  one_class.series = {{1, 2, 3, 4, 5, 6, 7, 8}, {2, 3, 4, 5, 6, 7, 8, 9}};
  one_class.labels = {"x", "x"};
  one_class.classes = {"x"};
  one_class.class_index = {{"x", 0}};
  CHECK_THROWS_AS(fit(one_class, quick_fit_options()), std::invalid_argument);

  TimeSeriesDataset unlabeled;
  unlabeled.series = {{1, 2, 3, 4, 5, 6, 7, 8}};
  CHECK_THROWS_AS(fit(unlabeled, quick_fit_options()), std::invalid_argument);

  const TimeSeriesDataset train = testsupport::synthetic_dataset(6, 64, 800);
  FitOptions bad = quick_fit_options();
  bad.sfa_k = 0;
  CHECK_THROWS_AS(fit(train, bad), std::invalid_argument);
}
