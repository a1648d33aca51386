#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace mrsqm {

// Which CSV column carries the class label.
enum class LabelColumn { First, Last };

// Labeled collection of equal-length univariate series. Immutable once
// loaded; safe to share across threads.
struct TimeSeriesDataset {
  std::vector<std::vector<double>> series;
  std::vector<std::string> labels;  // one per series; empty if unlabeled
  std::vector<std::string> classes; // class id -> label, in index order
  std::unordered_map<std::string, int> class_index;

  std::size_t size() const { return series.size(); }
  std::size_t length() const { return series.empty() ? 0 : series.front().size(); }
  std::size_t num_classes() const { return classes.size(); }
  bool labeled() const { return !labels.empty(); }

  int class_of(std::size_t i) const { return class_index.at(labels[i]); }
};

// UCR-style .ts reader: '@' directive lines (at least '@data'; '@classLabel
// true <labels...>' fixes the class order), then one series per line as
// comma-separated values, optionally followed by ':label'. '#' comments and
// blank lines are skipped.
TimeSeriesDataset load_ts(const std::filesystem::path& path);

// Plain CSV, one series per row, label in the first or last column.
TimeSeriesDataset load_csv(const std::filesystem::path& path, LabelColumn label_column,
                           bool skip_header = false);

// Writes a dataset back out in .ts form. Values round-trip exactly.
void write_ts(const TimeSeriesDataset& dataset, const std::filesystem::path& path);

} // namespace mrsqm
