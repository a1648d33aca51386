#include "mrsqm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrsqm/common.hpp"

namespace mrsqm {

namespace {

std::string strip(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_value(const std::string& token, const std::string& where) {
  std::string t = strip(token);
  if (!t.empty() && t.front() == '+') t.erase(t.begin());
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError("non-numeric value '" + t + "' " + where);
  if (!std::isfinite(v))
    throw ParseError("non-finite value '" + t + "' " + where);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

int intern_class(TimeSeriesDataset& ds, const std::string& label) {
  auto it = ds.class_index.find(label);
  if (it != ds.class_index.end()) return it->second;
  int id = static_cast<int>(ds.classes.size());
  ds.classes.push_back(label);
  ds.class_index.emplace(label, id);
  return id;
}

void check_rectangular(const TimeSeriesDataset& ds, std::size_t row_len,
                       std::size_t line_no) {
  if (!ds.series.empty() && row_len != ds.series.front().size())
    throw FormatError("line " + std::to_string(line_no) + ": series of length " +
                      std::to_string(row_len) + " but earlier lines have length " +
                      std::to_string(ds.series.front().size()));
  if (row_len == 0)
    throw FormatError("line " + std::to_string(line_no) + ": empty series");
}

} // namespace

TimeSeriesDataset load_ts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");

  TimeSeriesDataset ds;
  bool declared_classes = false;
  bool in_data = false;
  bool saw_labeled = false;
  bool saw_unlabeled = false;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = strip(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!in_data) {
      if (line.front() != '@')
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected directive or @data before data lines");
      std::istringstream dir(line);
      std::string name;
      dir >> name;
      name = lower(name);
      if (name == "@data") {
        in_data = true;
      } else if (name == "@classlabel") {
        std::string flag;
        dir >> flag;
        if (lower(flag) == "true") {
          declared_classes = true;
          std::string label;
          while (dir >> label) intern_class(ds, label);
        }
      }
      continue;
    }

    std::string values_part = line;
    std::size_t colon = line.rfind(':');
    std::string label;
    bool has_label = colon != std::string::npos;
    if (has_label) {
      values_part = line.substr(0, colon);
      label = strip(line.substr(colon + 1));
      if (label.empty())
        throw FormatError("line " + std::to_string(line_no) + ": empty label");
    }

    std::vector<double> row;
    for (const std::string& tok : split(values_part, ','))
      row.push_back(parse_value(tok, "at line " + std::to_string(line_no)));
    check_rectangular(ds, row.size(), line_no);
    ds.series.push_back(std::move(row));

    if (has_label) {
      saw_labeled = true;
      if (declared_classes && !ds.class_index.count(label))
        throw FormatError("line " + std::to_string(line_no) + ": label '" + label +
                          "' not in @classLabel declaration");
      intern_class(ds, label);
      ds.labels.push_back(label);
    } else {
      saw_unlabeled = true;
    }
    if (saw_labeled && saw_unlabeled)
      throw FormatError("line " + std::to_string(line_no) +
                        ": mix of labeled and unlabeled series");
  }

  if (!in_data) throw FormatError("'" + path.string() + "': missing @data directive");
  if (ds.series.empty()) throw FormatError("'" + path.string() + "': no data lines");
  if (!saw_labeled) {
    ds.classes.clear();
    ds.class_index.clear();
  }
  return ds;
}

TimeSeriesDataset load_csv(const std::filesystem::path& path, LabelColumn label_column,
                           bool skip_header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");

  TimeSeriesDataset ds;
  std::string raw;
  std::size_t line_no = 0;
  bool skipped = !skip_header;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = strip(raw);
    if (line.empty()) continue;
    if (!skipped) {
      skipped = true;
      continue;
    }

    std::vector<std::string> cells = split(line, ',');
    if (cells.size() < 2)
      throw FormatError("line " + std::to_string(line_no) +
                        ": need at least a label and one value");
    std::string label;
    if (label_column == LabelColumn::First) {
      label = strip(cells.front());
      cells.erase(cells.begin());
    } else {
      label = strip(cells.back());
      cells.pop_back();
    }
    if (label.empty())
      throw FormatError("line " + std::to_string(line_no) + ": empty label");

    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& tok : cells)
      row.push_back(parse_value(tok, "at line " + std::to_string(line_no)));
    check_rectangular(ds, row.size(), line_no);
    ds.series.push_back(std::move(row));
    intern_class(ds, label);
    ds.labels.push_back(label);
  }

  if (ds.series.empty()) throw FormatError("'" + path.string() + "': no data rows");
  return ds;
}

void write_ts(const TimeSeriesDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");

  if (dataset.labeled()) {
    out << "@classLabel true";
    for (const std::string& c : dataset.classes) out << ' ' << c;
    out << '\n';
  }
  out << "@data\n";

  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.series[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s[j]);
      if (j) out << ',';
      out << buf;
    }
    if (dataset.labeled()) out << ':' << dataset.labels[i];
    out << '\n';
  }
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

} // namespace mrsqm
