#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mrsqm/dataset.hpp"
#include "mrsqm/model.hpp"

namespace fs = std::filesystem;
using namespace mrsqm;

namespace {

struct IoOptions {
  std::string label_column = "first";
  bool header = false;
};

struct FitCli {
  std::string train_path;
  std::string out_path;
  std::string transform = "sfa";
  int k = 5;
  int sax_k = -1; // -1: fall back to --k
  int sfa_k = -1;
  std::string selection = "rs";
  int features = 500;
  std::uint64_t seed = 42;
  bool no_numerosity_reduction = false;
  bool drop_dc = false;
  double reg = 1.0;
  double tol = 1e-4;
  int max_iter = 1000;
  std::string dump_sequences; // debug: symbolic sequences per representation
  std::string dump_features;  // debug: selected subwords with counts and scores
  IoOptions io;
};

struct PredictCli {
  std::string model_path;
  std::string test_path;
  std::string out_path;
  IoOptions io;
};

struct BenchmarkCli {
  std::string dir;
  std::string datasets_path;
  std::string out_path;
  int jobs = 1;
  FitCli fit; // transform/selection/seed knobs shared with fit
};

TimeSeriesDataset load_any(const std::string& path, const IoOptions& io) {
  if (fs::path(path).extension() == ".csv")
    return load_csv(path, io.label_column == "last" ? LabelColumn::Last : LabelColumn::First,
                    io.header);
  return load_ts(path);
}

FitOptions to_fit_options(const FitCli& cli) {
  FitOptions opt;
  opt.mode = transform_mode_from_name(cli.transform);
  opt.sax_k = cli.sax_k >= 0 ? cli.sax_k : cli.k;
  opt.sfa_k = cli.sfa_k >= 0 ? cli.sfa_k : cli.k;
  if (opt.mode == TransformMode::Sax) opt.sfa_k = 0;
  if (opt.mode == TransformMode::Sfa) opt.sax_k = 0;
  opt.strategy = strategy_from_name(cli.selection);
  opt.features_per_rep = cli.features;
  opt.seed = cli.seed;
  opt.numerosity_reduction = !cli.no_numerosity_reduction;
  opt.drop_dc = cli.drop_dc;
  opt.train.reg_strength = cli.reg;
  opt.train.tol = cli.tol;
  opt.train.max_iter = cli.max_iter;
  return opt;
}

void print_config_echo(const FitOptions& opt) {
  std::printf("config: transform=%s sax_k=%d sfa_k=%d selection=%s features=%d seed=%llu "
              "numerosity_reduction=%s drop_dc=%s reg=%g tol=%g max_iter=%d\n",
              transform_mode_name(opt.mode).c_str(), opt.sax_k, opt.sfa_k,
              strategy_name(opt.strategy).c_str(), opt.features_per_rep,
              static_cast<unsigned long long>(opt.seed),
              opt.numerosity_reduction ? "on" : "off", opt.drop_dc ? "on" : "off",
              opt.train.reg_strength, opt.train.tol, opt.train.max_iter);
}

std::string describe_config(const ReprConfig& cfg) {
  std::string out = cfg.transform == TransformKind::Sax ? "sax" : "sfa";
  out += " l=" + std::to_string(cfg.window_len) + " w=" + std::to_string(cfg.word_len) +
         " alpha=" + std::to_string(cfg.alphabet);
  return out;
}

int run_fit(const FitCli& cli) {
  const FitOptions opt = to_fit_options(cli);
  print_config_echo(opt);

  const TimeSeriesDataset train = load_any(cli.train_path, cli.io);
  FitReport report;
  const MrsqmModel model = fit(train, opt, &report);
  save_model(model, cli.out_path);

  if (!cli.dump_sequences.empty()) {
    std::ofstream dump(cli.dump_sequences);
    if (!dump) throw std::runtime_error("cannot write '" + cli.dump_sequences + "'");
    for (const Representation& rep : model.representations) {
      dump << "# " << describe_config(rep.config) << '\n';
      dump << format_sequences(transform_dataset(train, rep.config));
    }
  }
  if (!cli.dump_features.empty()) {
    std::ofstream dump(cli.dump_features);
    if (!dump) throw std::runtime_error("cannot write '" + cli.dump_features + "'");
    for (const Representation& rep : model.representations) {
      dump << "# " << describe_config(rep.config) << '\n';
      dump << format_feature_set(rep.features);
    }
  }

  std::printf("representations: %zu\n", report.num_representations);
  std::printf("total features: %zu\n", report.total_features);
  std::printf("train accuracy: %.4f\n", report.train_accuracy);
  std::printf("stage seconds: transform=%.3f mining=%.3f training=%.3f\n",
              report.transform_seconds, report.mining_seconds, report.training_seconds);
  if (!model.classifier.converged)
    std::fprintf(stderr, "warning: classifier did not reach tolerance %g in %d iterations\n",
                 opt.train.tol, opt.train.max_iter);
  std::printf("model written to %s\n", cli.out_path.c_str());
  return 0;
}

void write_predictions(const Prediction& pred, const MrsqmModel& model,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "index,predicted_label";
  for (std::size_t c = 0; c < model.classes.size(); ++c) out << ",prob_class_" << c;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    out << i << ',' << pred.labels[i];
    for (double p : pred.probabilities[i]) {
      std::snprintf(buf, sizeof buf, "%.6f", p);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

int run_predict(const PredictCli& cli) {
  const MrsqmModel model = load_model(cli.model_path);
  const TimeSeriesDataset test = load_any(cli.test_path, cli.io);
  const Prediction pred = predict(model, test);
  write_predictions(pred, model, cli.out_path);
  std::printf("predictions written to %s\n", cli.out_path.c_str());
  if (test.labeled()) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (pred.labels[i] == test.labels[i]) ++correct;
    std::printf("accuracy: %.4f\n",
                static_cast<double>(correct) / static_cast<double>(test.size()));
  }
  return 0;
}

struct BenchmarkRow {
  std::string name;
  std::size_t n_train = 0, n_test = 0, series_len = 0, classes = 0;
  double accuracy = 0.0, fit_seconds = 0.0, predict_seconds = 0.0;
  std::string error;
};

fs::path dataset_split(const fs::path& dir, const std::string& name, const char* split) {
  const fs::path nested = dir / name / (name + "_" + split + ".ts");
  if (fs::exists(nested)) return nested;
  return dir / (name + "_" + split + ".ts");
}

BenchmarkRow run_one_dataset(const fs::path& dir, const std::string& name,
                             const FitOptions& opt) {
  using clock = std::chrono::steady_clock;
  BenchmarkRow row;
  row.name = name;
  try {
    const TimeSeriesDataset train = load_ts(dataset_split(dir, name, "TRAIN"));
    const TimeSeriesDataset test = load_ts(dataset_split(dir, name, "TEST"));
    row.n_train = train.size();
    row.n_test = test.size();
    row.series_len = train.length();
    row.classes = train.num_classes();

    const auto t0 = clock::now();
    const MrsqmModel model = fit(train, opt);
    const auto t1 = clock::now();
    const Prediction pred = predict(model, test);
    const auto t2 = clock::now();

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (pred.labels[i] == test.labels[i]) ++correct;
    row.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    row.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    row.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

int run_benchmark(const BenchmarkCli& cli) {
  const fs::path dir(cli.dir);
  if (!fs::is_directory(dir)) {
    std::fprintf(stderr, "error: '%s' is not a readable directory\n", cli.dir.c_str());
    return 1;
  }

  std::vector<std::string> names;
  {
    std::ifstream list(cli.datasets_path);
    if (!list) {
      std::fprintf(stderr, "error: cannot open dataset list '%s'\n",
                   cli.datasets_path.c_str());
      return 1;
    }
    std::string line;
    while (std::getline(list, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty() && line.front() != '#') names.push_back(line);
    }
  }

  const FitOptions opt = to_fit_options(cli.fit);
  print_config_echo(opt);

  std::vector<BenchmarkRow> rows(names.size());
  const int jobs = std::max(1, cli.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < names.size(); i = next.fetch_add(1))
      rows[i] = run_one_dataset(dir, names[i], opt);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream out(cli.out_path);
  if (!out) {
    std::fprintf(stderr, "error: cannot write '%s'\n", cli.out_path.c_str());
    return 1;
  }
  out << "dataset,n_train,n_test,series_len,classes,accuracy,fit_seconds,predict_seconds,error\n";
  char buf[64];
  for (const BenchmarkRow& row : rows) {
    if (row.error.empty()) {
      std::snprintf(buf, sizeof buf, "%.4f,%.3f,%.3f", row.accuracy, row.fit_seconds,
                    row.predict_seconds);
      out << row.name << ',' << row.n_train << ',' << row.n_test << ',' << row.series_len
          << ',' << row.classes << ',' << buf << ",\n";
    } else {
      std::string msg = row.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      out << row.name << ",,,,,,,," << msg << '\n';
    }
    std::printf("%s: %s\n", row.name.c_str(),
                row.error.empty() ? "ok" : row.error.c_str());
  }
  std::printf("results written to %s\n", cli.out_path.c_str());
  return 0;
}

void add_io_flags(CLI::App* cmd, IoOptions& io) {
  cmd->add_option("--label-column", io.label_column, "CSV label column")
      ->check(CLI::IsMember({"first", "last"}))
      ->capture_default_str();
  cmd->add_flag("--header", io.header, "skip one CSV header line");
}

void add_fit_flags(CLI::App* cmd, FitCli& cli) {
  cmd->add_option("--transform", cli.transform, "symbolic transform")
      ->check(CLI::IsMember({"sax", "sfa", "both"}))
      ->capture_default_str();
  cmd->add_option("--k", cli.k, "representations per transform: ceil(k*log2(L))")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  cmd->add_option("--sax-k", cli.sax_k, "SAX density (defaults to --k)")
      ->check(CLI::Range(1, 1 << 30));
  cmd->add_option("--sfa-k", cli.sfa_k, "SFA density (defaults to --k)")
      ->check(CLI::Range(1, 1 << 30));
  cmd->add_option("--selection", cli.selection, "feature selection strategy")
      ->check(CLI::IsMember({"r", "s", "rs", "sr"}))
      ->capture_default_str();
  cmd->add_option("--features", cli.features, "features kept per representation")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  cmd->add_option("--seed", cli.seed, "master random seed")->capture_default_str();
  cmd->add_flag("--no-numerosity-reduction", cli.no_numerosity_reduction,
                "keep runs of identical words");
  cmd->add_flag("--drop-dc", cli.drop_dc, "drop the DC pair from SFA words");
  cmd->add_option("--reg", cli.reg, "inverse L2 regularization strength")
      ->capture_default_str();
  cmd->add_option("--tol", cli.tol, "gradient tolerance")->capture_default_str();
  cmd->add_option("--max-iter", cli.max_iter, "optimizer iteration cap")
      ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrsqm: time series classification with multiple symbolic representations "
               "and sequence mining"};
  app.require_subcommand(1);

  FitCli fit_cli;
  CLI::App* fit_cmd = app.add_subcommand("fit", "train a model");
  fit_cmd->add_option("--train", fit_cli.train_path, "training .ts or .csv file")
      ->required();
  fit_cmd->add_option("--out", fit_cli.out_path, "output model file")->required();
  add_fit_flags(fit_cmd, fit_cli);
  add_io_flags(fit_cmd, fit_cli.io);
  fit_cmd->add_option("--dump-sequences", fit_cli.dump_sequences,
                      "write symbolic sequences per representation to this file");
  fit_cmd->add_option("--dump-features", fit_cli.dump_features,
                      "write selected subwords with counts and scores to this file");

  PredictCli predict_cli;
  CLI::App* predict_cmd = app.add_subcommand("predict", "classify a test set");
  predict_cmd->add_option("--model", predict_cli.model_path, "model file")->required();
  predict_cmd->add_option("--test", predict_cli.test_path, "test .ts or .csv file")
      ->required();
  predict_cmd->add_option("--out", predict_cli.out_path, "output predictions CSV")
      ->required();
  add_io_flags(predict_cmd, predict_cli.io);

  BenchmarkCli bench_cli;
  CLI::App* bench_cmd = app.add_subcommand("benchmark", "run fit+predict over datasets");
  bench_cmd->add_option("--dir", bench_cli.dir, "directory with <name>_{TRAIN,TEST}.ts")
      ->required();
  bench_cmd->add_option("--datasets", bench_cli.datasets_path, "file listing dataset names")
      ->required();
  bench_cmd->add_option("--out", bench_cli.out_path, "output results CSV")->required();
  bench_cmd->add_option("--jobs", bench_cli.jobs, "datasets processed in parallel")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  add_fit_flags(bench_cmd, bench_cli.fit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_cli);
    if (predict_cmd->parsed()) return run_predict(predict_cli);
    if (bench_cmd->parsed()) return run_benchmark(bench_cli);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
