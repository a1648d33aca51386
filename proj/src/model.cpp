#include "mrsqm/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mrsqm/common.hpp"

namespace mrsqm {

namespace {

constexpr std::uint64_t kStreamMining = 3;
constexpr int kModelVersion = 1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// scores for one row under packed params: scores[c] = b_c + sum_j W[c][j]
void row_scores(std::span<const double> params, std::size_t dim, int num_classes,
                const std::vector<std::uint32_t>& cols, std::span<double> scores) {
  const std::size_t intercept_base = dim * static_cast<std::size_t>(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    double s = params[intercept_base + static_cast<std::size_t>(c)];
    const std::size_t base = static_cast<std::size_t>(c) * dim;
    for (std::uint32_t j : cols) s += params[base + j];
    scores[static_cast<std::size_t>(c)] = s;
  }
}

void softmax_in_place(std::span<double> scores) {
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - m);
    z += s;
  }
  for (double& s : scores) s /= z;
}

std::string current_utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default:
      if (static_cast<unsigned char>(ch) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\u%04x", ch);
        out += buf;
      } else {
        out += ch;
      }
    }
  }
  out += '"';
}

void append_double_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    format_double(out, values[i]);
  }
  out += ']';
}

} // namespace

FeatureMatrix featurize(const std::vector<std::vector<SymbolicSequence>>& per_rep_sequences,
                        const std::vector<FeatureSet>& per_rep_features) {
  if (per_rep_sequences.size() != per_rep_features.size())
    throw std::invalid_argument("representation count mismatch between sequences (" +
                                std::to_string(per_rep_sequences.size()) +
                                ") and feature sets (" +
                                std::to_string(per_rep_features.size()) + ")");
  if (per_rep_sequences.empty()) throw std::invalid_argument("no representations");

  const std::size_t rows = per_rep_sequences.front().size();
  FeatureMatrix matrix;
  matrix.rows = rows;
  matrix.row_features.resize(rows);

  std::uint32_t offset = 0;
  for (std::size_t r = 0; r < per_rep_sequences.size(); ++r) {
    const auto& sequences = per_rep_sequences[r];
    if (sequences.size() != rows)
      throw std::invalid_argument("representation " + std::to_string(r) +
                                  " transforms a different number of series");
    const SubwordMatcher matcher(per_rep_features[r].subwords);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::uint32_t pat : matcher.matches(sequences[i]))
        matrix.row_features[i].push_back(offset + pat);
    offset += static_cast<std::uint32_t>(per_rep_features[r].subwords.size());
  }
  matrix.cols = offset;
  return matrix;
}

double classifier_objective(const FeatureMatrix& x, const std::vector<int>& labels,
                            int num_classes, double reg_strength,
                            std::span<const double> params) {
  const std::size_t dim = x.cols;
  std::vector<double> scores(static_cast<std::size_t>(num_classes));
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    row_scores(params, dim, num_classes, x.row_features[i], scores);
    double m = -std::numeric_limits<double>::infinity();
    for (double s : scores) m = std::max(m, s);
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    loss += m + std::log(z) - scores[static_cast<std::size_t>(labels[i])];
  }
  const std::size_t weight_count = dim * static_cast<std::size_t>(num_classes);
  double reg = 0.0;
  for (std::size_t i = 0; i < weight_count; ++i) reg += params[i] * params[i];
  return loss + reg / (2.0 * reg_strength);
}

void classifier_gradient(const FeatureMatrix& x, const std::vector<int>& labels,
                         int num_classes, double reg_strength,
                         std::span<const double> params, std::span<double> grad) {
  const std::size_t dim = x.cols;
  const std::size_t weight_count = dim * static_cast<std::size_t>(num_classes);
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> scores(static_cast<std::size_t>(num_classes));

  for (std::size_t i = 0; i < x.rows; ++i) {
    row_scores(params, dim, num_classes, x.row_features[i], scores);
    softmax_in_place(scores);
    scores[static_cast<std::size_t>(labels[i])] -= 1.0;
    for (int c = 0; c < num_classes; ++c) {
      const double g = scores[static_cast<std::size_t>(c)];
      grad[weight_count + static_cast<std::size_t>(c)] += g;
      const std::size_t base = static_cast<std::size_t>(c) * dim;
      for (std::uint32_t j : x.row_features[i]) grad[base + j] += g;
    }
  }
  for (std::size_t i = 0; i < weight_count; ++i) grad[i] += params[i] / reg_strength;
}

LinearClassifier train_classifier(const FeatureMatrix& x, const std::vector<int>& labels,
                                  int num_classes, const TrainOptions& options) {
  if (num_classes < 2) throw std::invalid_argument("training needs at least 2 classes");
  if (x.rows == 0) throw std::invalid_argument("empty design matrix");
  if (labels.size() != x.rows) throw std::invalid_argument("label/row count mismatch");
  {
    std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
    for (int y : labels) {
      if (y < 0 || y >= num_classes) throw std::invalid_argument("label out of range");
      present[static_cast<std::size_t>(y)] = true;
    }
    if (std::count(present.begin(), present.end(), true) < 2)
      throw std::invalid_argument("training needs at least 2 classes present");
  }

  const std::size_t dim = x.cols;
  const std::size_t n_params =
      dim * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(num_classes);

  std::vector<double> params(n_params, 0.0);
  std::vector<double> grad(n_params, 0.0);
  std::vector<double> new_params(n_params), new_grad(n_params), direction(n_params);

  auto objective = [&](std::span<const double> p) {
    return classifier_objective(x, labels, num_classes, options.reg_strength, p);
  };

  double f = objective(params);
  classifier_gradient(x, labels, num_classes, options.reg_strength, params, grad);

  // limited-memory BFGS with Armijo backtracking
  constexpr std::size_t kHistory = 8;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  LinearClassifier out;
  out.num_classes = num_classes;
  out.dim = dim;
  out.converged = false;
  out.objective_trace.push_back(f);

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (inf_norm(grad) < options.tol) {
      out.converged = true;
      break;
    }

    // two-loop recursion
    direction = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t h = s_hist.size(); h-- > 0;) {
      alpha[h] = rho_hist[h] * dot(s_hist[h], direction);
      for (std::size_t i = 0; i < n_params; ++i) direction[i] -= alpha[h] * y_hist[h][i];
    }
    if (!s_hist.empty()) {
      const double gamma =
          dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& d : direction) d *= gamma;
    }
    for (std::size_t h = 0; h < s_hist.size(); ++h) {
      const double beta = rho_hist[h] * dot(y_hist[h], direction);
      for (std::size_t i = 0; i < n_params; ++i)
        direction[i] += (alpha[h] - beta) * s_hist[h][i];
    }
    for (double& d : direction) d = -d;

    double dg = dot(direction, grad);
    if (dg >= 0.0) { // not a descent direction: fall back to steepest descent
      for (std::size_t i = 0; i < n_params; ++i) direction[i] = -grad[i];
      dg = -dot(grad, grad);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1.0, inf_norm(grad))) : 1.0;
    constexpr double kArmijo = 1e-4;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n_params; ++i)
        new_params[i] = params[i] + step * direction[i];
      f_new = objective(new_params);
      if (f_new <= f + kArmijo * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break; // at numerical floor; report non-convergence

    classifier_gradient(x, labels, num_classes, options.reg_strength, new_params, new_grad);

    std::vector<double> s(n_params), yv(n_params);
    double sy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n_params; ++i) {
      s[i] = new_params[i] - params[i];
      yv[i] = new_grad[i] - grad[i];
      sy += s[i] * yv[i];
      yy += yv[i] * yv[i];
    }
    if (sy > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(yy)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    params.swap(new_params);
    grad.swap(new_grad);
    f = f_new;
    out.objective_trace.push_back(f);
  }
  if (iter == options.max_iter && inf_norm(grad) < options.tol) out.converged = true;

  out.iterations = iter;
  const std::size_t weight_count = dim * static_cast<std::size_t>(num_classes);
  out.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(weight_count));
  out.intercepts.assign(params.begin() + static_cast<std::ptrdiff_t>(weight_count), params.end());
  return out;
}

std::string transform_mode_name(TransformMode mode) {
  switch (mode) {
  case TransformMode::Sax: return "sax";
  case TransformMode::Sfa: return "sfa";
  case TransformMode::Both: return "both";
  }
  return "?";
}

TransformMode transform_mode_from_name(const std::string& name) {
  if (name == "sax") return TransformMode::Sax;
  if (name == "sfa") return TransformMode::Sfa;
  if (name == "both") return TransformMode::Both;
  throw std::invalid_argument("unknown transform '" + name + "'");
}

std::size_t MrsqmModel::total_features() const {
  std::size_t total = 0;
  for (const Representation& rep : representations) total += rep.features.subwords.size();
  return total;
}

int MrsqmModel::max_window() const {
  int m = 0;
  for (const Representation& rep : representations) m = std::max(m, rep.config.window_len);
  return m;
}

Prediction predict(const MrsqmModel& model, const TimeSeriesDataset& dataset) {
  if (model.representations.empty()) throw StateError("model has no representations");
  if (dataset.length() < static_cast<std::size_t>(model.max_window()))
    throw std::invalid_argument("series length " + std::to_string(dataset.length()) +
                                " is shorter than the largest representation window " +
                                std::to_string(model.max_window()));

  std::vector<std::vector<SymbolicSequence>> per_rep;
  std::vector<FeatureSet> feature_sets;
  per_rep.reserve(model.representations.size());
  feature_sets.reserve(model.representations.size());
  for (const Representation& rep : model.representations) {
    per_rep.push_back(transform_dataset(dataset, rep.config));
    feature_sets.push_back(rep.features);
  }
  const FeatureMatrix matrix = featurize(per_rep, feature_sets);

  const int c = model.classifier.num_classes;
  std::vector<double> params = model.classifier.weights;
  params.insert(params.end(), model.classifier.intercepts.begin(),
                model.classifier.intercepts.end());

  Prediction pred;
  pred.labels.reserve(matrix.rows);
  pred.probabilities.reserve(matrix.rows);
  std::vector<double> scores(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    row_scores(params, matrix.cols, c, matrix.row_features[i], scores);
    softmax_in_place(scores);
    int best = 0;
    for (int k = 1; k < c; ++k)
      if (scores[static_cast<std::size_t>(k)] > scores[static_cast<std::size_t>(best)])
        best = k;
    pred.labels.push_back(model.classes[static_cast<std::size_t>(best)]);
    pred.probabilities.emplace_back(scores.begin(), scores.end());
  }
  return pred;
}

void save_model(const MrsqmModel& model, const std::filesystem::path& path) {
  if (model.representations.empty())
    throw std::invalid_argument("refusing to save a model with no representations");
  const std::size_t dim = model.total_features();
  if (model.classifier.dim != dim ||
      model.classifier.weights.size() !=
          dim * static_cast<std::size_t>(model.classifier.num_classes) ||
      model.classifier.intercepts.size() !=
          static_cast<std::size_t>(model.classifier.num_classes))
    throw std::invalid_argument("classifier shape does not match feature sets");

  std::string out;
  out.reserve(1 << 20);
  out += "{\n";
  out += "  \"version\": " + std::to_string(kModelVersion) + ",\n";
  out += "  \"seed\": " + std::to_string(model.seed) + ",\n";
  out += "  \"transform\": \"" + transform_mode_name(model.mode) + "\",\n";
  const int headline_k = model.mode == TransformMode::Sax ? model.sax_k : model.sfa_k;
  out += "  \"k\": " + std::to_string(headline_k) + ",\n";
  out += "  \"sax_k\": " + std::to_string(model.sax_k) + ",\n";
  out += "  \"sfa_k\": " + std::to_string(model.sfa_k) + ",\n";
  out += "  \"strategy\": \"" + strategy_name(model.strategy) + "\",\n";
  out += "  \"features_per_rep\": " + std::to_string(model.features_per_rep) + ",\n";
  out += "  \"trained_at\": \"" + model.trained_at + "\",\n";

  out += "  \"classes\": [";
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    if (i) out += ", ";
    append_json_string(out, model.classes[i]);
  }
  out += "],\n";

  out += "  \"representations\": [\n";
  for (std::size_t r = 0; r < model.representations.size(); ++r) {
    const Representation& rep = model.representations[r];
    const ReprConfig& cfg = rep.config;
    out += "    {\n";
    out += "      \"transform\": \"";
    out += cfg.transform == TransformKind::Sax ? "sax" : "sfa";
    out += "\",\n";
    out += "      \"l\": " + std::to_string(cfg.window_len) + ",\n";
    out += "      \"w\": " + std::to_string(cfg.word_len) + ",\n";
    out += "      \"alpha\": " + std::to_string(cfg.alphabet) + ",\n";
    out += "      \"numerosity_reduction\": ";
    out += cfg.numerosity_reduction ? "true" : "false";
    out += ",\n";
    out += "      \"drop_dc\": ";
    out += cfg.drop_dc ? "true" : "false";
    out += ",\n";
    if (cfg.transform == TransformKind::Sfa) {
      out += "      \"bins\": [";
      for (std::size_t p = 0; p < cfg.bins.size(); ++p) {
        if (p) out += ", ";
        append_double_array(out, cfg.bins[p]);
      }
      out += "],\n";
    }
    out += "      \"features\": [";
    for (std::size_t i = 0; i < rep.features.subwords.size(); ++i) {
      if (i) out += ", ";
      append_json_string(out, rep.features.subwords[i]);
    }
    out += "]\n";
    out += r + 1 < model.representations.size() ? "    },\n" : "    }\n";
  }
  out += "  ],\n";

  out += "  \"weights\": [\n";
  for (int c = 0; c < model.classifier.num_classes; ++c) {
    out += "    ";
    append_double_array(
        out, std::span<const double>(model.classifier.weights.data() +
                                         static_cast<std::size_t>(c) * dim,
                                     dim));
    out += c + 1 < model.classifier.num_classes ? ",\n" : "\n";
  }
  out += "  ],\n";
  out += "  \"intercepts\": ";
  append_double_array(out, model.classifier.intercepts);
  out += "\n}\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  file << out;
  if (!file) throw std::runtime_error("write to '" + path.string() + "' failed");
}

MrsqmModel load_model(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ParseError("cannot open model file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file '" + path.string() + "': " + e.what());
  }

  try {
    if (!doc.contains("version") || !doc["version"].is_number_integer())
      throw ParseError("model file '" + path.string() + "': missing version field");
    const int version = doc["version"].get<int>();
    if (version != kModelVersion)
      throw VersionError("model file '" + path.string() + "' has version " +
                         std::to_string(version) + ", expected " +
                         std::to_string(kModelVersion));

    MrsqmModel model;
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.mode = transform_mode_from_name(doc.at("transform").get<std::string>());
    model.sax_k = doc.contains("sax_k") ? doc["sax_k"].get<int>()
                  : model.mode == TransformMode::Sax ? doc.at("k").get<int>() : 0;
    model.sfa_k = doc.contains("sfa_k") ? doc["sfa_k"].get<int>()
                  : model.mode != TransformMode::Sax ? doc.at("k").get<int>() : 0;
    model.strategy = strategy_from_name(doc.at("strategy").get<std::string>());
    model.features_per_rep = doc.value("features_per_rep", 500);
    model.trained_at = doc.value("trained_at", "");
    model.classes = doc.at("classes").get<std::vector<std::string>>();

    for (const auto& jr : doc.at("representations")) {
      Representation rep;
      const std::string kind = jr.at("transform").get<std::string>();
      rep.config.transform = kind == "sax" ? TransformKind::Sax : TransformKind::Sfa;
      rep.config.window_len = jr.at("l").get<int>();
      rep.config.word_len = jr.at("w").get<int>();
      rep.config.alphabet = jr.at("alpha").get<int>();
      rep.config.numerosity_reduction = jr.at("numerosity_reduction").get<bool>();
      rep.config.drop_dc = jr.at("drop_dc").get<bool>();
      if (rep.config.transform == TransformKind::Sfa) {
        rep.config.bins = jr.at("bins").get<std::vector<std::vector<double>>>();
        if (rep.config.bins.size() != static_cast<std::size_t>(rep.config.word_len))
          throw ParseError("model file '" + path.string() + "': bin row count mismatch");
        for (const auto& row : rep.config.bins)
          if (row.size() != static_cast<std::size_t>(rep.config.alphabet - 1))
            throw ParseError("model file '" + path.string() + "': bin edge count mismatch");
      }
      rep.features.subwords = jr.at("features").get<std::vector<std::string>>();
      rep.features.strategy = model.strategy;
      model.representations.push_back(std::move(rep));
    }
    if (model.representations.empty())
      throw ParseError("model file '" + path.string() + "': no representations");

    const auto weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    model.classifier.num_classes = static_cast<int>(model.classes.size());
    model.classifier.dim = model.total_features();
    if (weights.size() != model.classes.size())
      throw ParseError("model file '" + path.string() + "': weight row count mismatch");
    for (const auto& row : weights) {
      if (row.size() != model.classifier.dim)
        throw ParseError("model file '" + path.string() + "': weight row length mismatch");
      model.classifier.weights.insert(model.classifier.weights.end(), row.begin(), row.end());
    }
    model.classifier.intercepts = doc.at("intercepts").get<std::vector<double>>();
    if (model.classifier.intercepts.size() != model.classes.size())
      throw ParseError("model file '" + path.string() + "': intercept count mismatch");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file '" + path.string() + "': " + e.what());
  }
}

MrsqmModel fit(const TimeSeriesDataset& dataset, const FitOptions& options,
               FitReport* report) {
  using clock = std::chrono::steady_clock;
  if (!dataset.labeled()) throw std::invalid_argument("training data has no labels");
  if (dataset.num_classes() < 2)
    throw std::invalid_argument("training needs at least 2 classes, got " +
                                std::to_string(dataset.num_classes()));
  if (options.features_per_rep < 1)
    throw std::invalid_argument("features per representation must be >= 1");

  const bool use_sax = options.mode != TransformMode::Sfa;
  const bool use_sfa = options.mode != TransformMode::Sax;
  if (use_sax && options.sax_k < 1)
    throw std::invalid_argument("SAX density k must be >= 1");
  if (use_sfa && options.sfa_k < 1)
    throw std::invalid_argument("SFA density k must be >= 1");

  std::vector<int> labels(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset.class_of(i);
  const int num_classes = static_cast<int>(dataset.num_classes());

  MrsqmModel model;
  model.seed = options.seed;
  model.mode = options.mode;
  model.sax_k = use_sax ? options.sax_k : 0;
  model.sfa_k = use_sfa ? options.sfa_k : 0;
  model.strategy = options.strategy;
  model.features_per_rep = options.features_per_rep;
  model.classes = dataset.classes;

  FitReport local;
  FitReport& rep = report ? *report : local;

  // stage 1: symbolic transforms
  const auto t0 = clock::now();
  std::vector<ReprConfig> configs;
  if (use_sax)
    for (ReprConfig& cfg :
         sample_configs(dataset.length(), options.sax_k, TransformKind::Sax, options.seed)) {
      cfg.numerosity_reduction = options.numerosity_reduction;
      configs.push_back(std::move(cfg));
    }
  if (use_sfa)
    for (ReprConfig& cfg :
         sample_configs(dataset.length(), options.sfa_k, TransformKind::Sfa, options.seed)) {
      cfg.numerosity_reduction = options.numerosity_reduction;
      cfg.drop_dc = options.drop_dc;
      configs.push_back(std::move(cfg));
    }
  if (configs.empty())
    throw std::invalid_argument("series too short: no representations to sample");

  std::vector<std::vector<SymbolicSequence>> per_rep_sequences;
  per_rep_sequences.reserve(configs.size());
  model.representations.reserve(configs.size());
  for (const ReprConfig& cfg : configs) {
    auto [fitted, sequences] = fit_transform_dataset(dataset, cfg);
    per_rep_sequences.push_back(std::move(sequences));
    model.representations.push_back({std::move(fitted), {}});
  }
  const auto t1 = clock::now();

  // stage 2: feature selection per representation
  std::vector<FeatureSet> feature_sets;
  feature_sets.reserve(configs.size());
  for (std::size_t r = 0; r < model.representations.size(); ++r) {
    Rng rng = Rng::substream(options.seed, kStreamMining, r);
    FeatureSet features = select_features(
        options.strategy, per_rep_sequences[r], labels, num_classes,
        static_cast<std::size_t>(options.features_per_rep),
        model.representations[r].config.word_len, rng);
    model.representations[r].features = features;
    feature_sets.push_back(std::move(features));
  }
  const auto t2 = clock::now();

  // stage 3: classifier over the concatenated feature space
  const FeatureMatrix matrix = featurize(per_rep_sequences, feature_sets);
  model.classifier = train_classifier(matrix, labels, num_classes, options.train);
  model.trained_at = current_utc_timestamp();
  const auto t3 = clock::now();

  std::vector<double> params = model.classifier.weights;
  params.insert(params.end(), model.classifier.intercepts.begin(),
                model.classifier.intercepts.end());
  std::vector<double> scores(static_cast<std::size_t>(num_classes));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    row_scores(params, matrix.cols, num_classes, matrix.row_features[i], scores);
    int best = 0;
    for (int k = 1; k < num_classes; ++k)
      if (scores[static_cast<std::size_t>(k)] > scores[static_cast<std::size_t>(best)])
        best = k;
    if (best == labels[i]) ++correct;
  }

  const auto seconds = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };
  rep.num_representations = model.representations.size();
  rep.total_features = model.total_features();
  rep.train_accuracy = static_cast<double>(correct) / static_cast<double>(matrix.rows);
  rep.transform_seconds = seconds(t0, t1);
  rep.mining_seconds = seconds(t1, t2);
  rep.training_seconds = seconds(t2, t3);
  return model;
}

} // namespace mrsqm
