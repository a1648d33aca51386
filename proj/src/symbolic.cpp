#include "mrsqm/symbolic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mrsqm/common.hpp"

namespace mrsqm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kStdGuard = 1e-8;

constexpr std::uint64_t kStreamConfigSax = 1;
constexpr std::uint64_t kStreamConfigSfa = 2;

constexpr int kWordChoices[] = {6, 8, 10, 12, 14, 16};
constexpr int kAlphabetChoices[] = {3, 4, 5, 6};

// Inverse standard-normal CDF: Acklam's rational approximation plus one
// Halley refinement against erfc, accurate to ~1 ulp over (0, 1).
double norm_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(kTwoPi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

char symbol_char(int index) { return static_cast<char>('a' + index); }

// Word positions map to these offsets of the interleaved (re, im) spectrum.
int coeff_values_needed(const ReprConfig& cfg) {
  return cfg.word_len + (cfg.drop_dc ? 2 : 0);
}

std::string discretize_word(std::span<const double> values, const ReprConfig& cfg) {
  const int skip = cfg.drop_dc ? 2 : 0;
  std::string word(static_cast<std::size_t>(cfg.word_len), 'a');
  for (int p = 0; p < cfg.word_len; ++p)
    word[static_cast<std::size_t>(p)] =
        symbol_char(symbol_index(values[static_cast<std::size_t>(skip + p)], cfg.bins[static_cast<std::size_t>(p)]));
  return word;
}

void push_reduced(SymbolicSequence& seq, std::string&& word, bool reduce) {
  if (reduce && !seq.empty() && seq.back() == word) return;
  seq.push_back(std::move(word));
}

// SAX over all sliding windows. Window mean/std come from running sums and
// raw-window PAA from prefix sums, then the z-normalization is applied as an
// affine map of the frame means; O(word_len) per window.
SymbolicSequence sax_transform_series(std::span<const double> x, const ReprConfig& cfg) {
  const std::size_t n = x.size();
  const int l = cfg.window_len;
  const int w = cfg.word_len;
  const std::size_t num_windows = n - static_cast<std::size_t>(l) + 1;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];

  const std::vector<double> edges = sax_breakpoints(cfg.alphabet);

  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < l; ++i) {
    sum += x[static_cast<std::size_t>(i)];
    sumsq += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }

  SymbolicSequence out;
  out.reserve(num_windows);
  std::string word(static_cast<std::size_t>(w), 'a');

  for (std::size_t t = 0; t < num_windows; ++t) {
    if (t > 0) {
      const double drop = x[t - 1];
      const double add = x[t + static_cast<std::size_t>(l) - 1];
      sum += add - drop;
      sumsq += add * add - drop * drop;
    }
    const double mean = sum / l;
    const double var = std::max(0.0, sumsq / l - mean * mean);
    const double stdev = std::sqrt(var);
    const bool flat = stdev < kStdGuard;
    const double inv_std = flat ? 0.0 : 1.0 / stdev;

    for (int j = 0; j < w; ++j) {
      double value = 0.0;
      if (!flat) {
        // frame j covers [j*l/w, (j+1)*l/w) of the window; integer bounds
        // scaled by w so boundary weights stay exact
        const std::int64_t lo = static_cast<std::int64_t>(j) * l;
        const std::int64_t hi = lo + l;
        const std::size_t i0 = static_cast<std::size_t>(lo / w);
        const std::size_t i1 = static_cast<std::size_t>((hi + w - 1) / w);
        double acc = 0.0;
        const std::int64_t w0 =
            std::min<std::int64_t>(static_cast<std::int64_t>(i0 + 1) * w, hi) -
            std::max<std::int64_t>(static_cast<std::int64_t>(i0) * w, lo);
        acc += x[t + i0] * static_cast<double>(w0);
        if (i1 > i0 + 1) {
          const std::int64_t wlast =
              std::min<std::int64_t>(static_cast<std::int64_t>(i1) * w, hi) -
              std::max<std::int64_t>(static_cast<std::int64_t>(i1 - 1) * w, lo);
          acc += x[t + i1 - 1] * static_cast<double>(wlast);
          acc += (prefix[t + i1 - 1] - prefix[t + i0 + 1]) * static_cast<double>(w);
        }
        const double frame_mean = acc / l;
        value = (frame_mean - mean) * inv_std;
      }
      word[static_cast<std::size_t>(j)] = symbol_char(symbol_index(value, edges));
    }
    push_reduced(out, std::string(word), cfg.numerosity_reduction);
  }
  return out;
}

SymbolicSequence sfa_discretize_windows(const std::vector<std::vector<double>>& windows,
                                        const ReprConfig& cfg) {
  SymbolicSequence out;
  out.reserve(windows.size());
  for (const auto& vals : windows)
    push_reduced(out, discretize_word(vals, cfg), cfg.numerosity_reduction);
  return out;
}

void check_window_fits(std::size_t series_len, const ReprConfig& cfg) {
  if (cfg.word_len < 1 || cfg.word_len > cfg.window_len)
    throw std::invalid_argument("word length " + std::to_string(cfg.word_len) +
                                " out of range for window of length " +
                                std::to_string(cfg.window_len));
  if (cfg.alphabet < 2 || cfg.alphabet > 26)
    throw std::invalid_argument("alphabet size must be in [2, 26]");
  if (cfg.window_len < 1 || static_cast<std::size_t>(cfg.window_len) > series_len)
    throw std::invalid_argument("window length " + std::to_string(cfg.window_len) +
                                " exceeds series length " + std::to_string(series_len));
}

} // namespace

std::size_t num_representations(std::size_t series_len, int k) {
  if (series_len < 2) return 0;
  if (std::has_single_bit(series_len))
    return static_cast<std::size_t>(k) *
           static_cast<std::size_t>(std::bit_width(series_len) - 1);
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(k) * std::log2(static_cast<double>(series_len))));
}

std::vector<ReprConfig> sample_configs(std::size_t series_len, int k, TransformKind kind,
                                       std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("density parameter k must be >= 1");
  if (series_len < 1) throw std::invalid_argument("empty series");

  const std::size_t count = num_representations(series_len, k);
  const double lo_exp = 3.0;
  const double hi_exp = std::log2(static_cast<double>(series_len));
  const int min_window = static_cast<int>(std::min<std::size_t>(8, series_len));

  std::vector<ReprConfig> configs;
  configs.reserve(count);
  const std::uint64_t tag = kind == TransformKind::Sax ? kStreamConfigSax : kStreamConfigSfa;

  for (std::size_t i = 0; i < count; ++i) {
    ReprConfig cfg;
    cfg.transform = kind;

    if (series_len < 8) {
      cfg.window_len = static_cast<int>(series_len);
    } else {
      const double e = count > 1
                           ? lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) /
                                          static_cast<double>(count - 1)
                           : hi_exp;
      int window = static_cast<int>(std::llround(std::exp2(e)));
      window = std::clamp(window, min_window, static_cast<int>(series_len));
      cfg.window_len = window;
    }

    Rng rng = Rng::substream(seed, tag, i);
    cfg.word_len = std::min(kWordChoices[rng.uniform_index(std::size(kWordChoices))],
                            cfg.window_len);
    cfg.alphabet = kAlphabetChoices[rng.uniform_index(std::size(kAlphabetChoices))];
    configs.push_back(std::move(cfg));
  }
  return configs;
}

std::vector<double> znormalize(std::span<const double> segment) {
  if (segment.empty()) throw std::invalid_argument("empty segment");
  const std::size_t n = segment.size();
  double mean = 0.0;
  for (double v : segment) mean += v;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double v : segment) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double stdev = std::sqrt(var);

  std::vector<double> out(n, 0.0);
  if (stdev < kStdGuard) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (segment[i] - mean) / stdev;
  return out;
}

std::vector<double> paa(std::span<const double> segment, int word_len) {
  const int l = static_cast<int>(segment.size());
  if (word_len < 1 || word_len > l)
    throw std::invalid_argument("word length " + std::to_string(word_len) +
                                " out of range for segment of length " + std::to_string(l));
  const int w = word_len;
  std::vector<double> out(static_cast<std::size_t>(w));
  for (int j = 0; j < w; ++j) {
    // frame bounds scaled by w: sample i occupies [i*w, (i+1)*w)
    const std::int64_t lo = static_cast<std::int64_t>(j) * l;
    const std::int64_t hi = lo + l;
    const std::size_t i0 = static_cast<std::size_t>(lo / w);
    const std::size_t i1 = static_cast<std::size_t>((hi + w - 1) / w);
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      const std::int64_t overlap =
          std::min<std::int64_t>(static_cast<std::int64_t>(i + 1) * w, hi) -
          std::max<std::int64_t>(static_cast<std::int64_t>(i) * w, lo);
      acc += segment[i] * static_cast<double>(overlap);
    }
    out[static_cast<std::size_t>(j)] = acc / l;
  }
  return out;
}

std::vector<double> sax_breakpoints(int alphabet) {
  if (alphabet < 2 || alphabet > 26)
    throw std::invalid_argument("alphabet size must be in [2, 26]");
  std::vector<double> edges(static_cast<std::size_t>(alphabet - 1));
  for (int i = 1; i < alphabet; ++i)
    edges[static_cast<std::size_t>(i - 1)] =
        norm_quantile(static_cast<double>(i) / alphabet);
  return edges;
}

int symbol_index(double value, std::span<const double> edges) {
  // count of edges strictly below the value
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), value) -
                          edges.begin());
}

std::string sax_word(std::span<const double> segment, int word_len, int alphabet) {
  const std::vector<double> z = znormalize(segment);
  const std::vector<double> frames = paa(z, word_len);
  const std::vector<double> edges = sax_breakpoints(alphabet);
  std::string word(frames.size(), 'a');
  for (std::size_t j = 0; j < frames.size(); ++j)
    word[j] = symbol_char(symbol_index(frames[j], edges));
  return word;
}

std::vector<double> dft_truncated(std::span<const double> segment, int num_coeffs) {
  const int l = static_cast<int>(segment.size());
  if (num_coeffs < 1 || num_coeffs > 2 * l)
    throw std::invalid_argument("num_coeffs " + std::to_string(num_coeffs) +
                                " out of range for segment of length " + std::to_string(l));
  const int half = (num_coeffs + 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(num_coeffs), 0.0);
  for (int k = 0; k < half; ++k) {
    double re = 0.0;
    double im = 0.0;
    const double step = -kTwoPi * k / l;
    for (int t = 0; t < l; ++t) {
      const double angle = step * t;
      re += segment[static_cast<std::size_t>(t)] * std::cos(angle);
      im += segment[static_cast<std::size_t>(t)] * std::sin(angle);
    }
    out[static_cast<std::size_t>(2 * k)] = re;
    if (2 * k + 1 < num_coeffs) out[static_cast<std::size_t>(2 * k + 1)] = im;
  }
  return out;
}

std::vector<std::vector<double>> sliding_dft_windows(std::span<const double> series,
                                                     int window_len, int num_coeffs) {
  const std::size_t n = series.size();
  if (window_len < 1 || static_cast<std::size_t>(window_len) > n)
    throw std::invalid_argument("window length " + std::to_string(window_len) +
                                " exceeds series length " + std::to_string(n));
  const int half = (num_coeffs + 1) / 2;
  const std::size_t num_windows = n - static_cast<std::size_t>(window_len) + 1;

  std::vector<double> re(static_cast<std::size_t>(half));
  std::vector<double> im(static_cast<std::size_t>(half));
  std::vector<double> tw_re(static_cast<std::size_t>(half));
  std::vector<double> tw_im(static_cast<std::size_t>(half));
  for (int k = 0; k < half; ++k) {
    const double angle = kTwoPi * k / window_len;
    tw_re[static_cast<std::size_t>(k)] = std::cos(angle);
    tw_im[static_cast<std::size_t>(k)] = std::sin(angle);
  }

  {
    const std::vector<double> first =
        dft_truncated(series.subspan(0, static_cast<std::size_t>(window_len)), 2 * half);
    for (int k = 0; k < half; ++k) {
      re[static_cast<std::size_t>(k)] = first[static_cast<std::size_t>(2 * k)];
      im[static_cast<std::size_t>(k)] = first[static_cast<std::size_t>(2 * k + 1)];
    }
  }

  std::vector<std::vector<double>> out(num_windows);
  auto emit = [&](std::size_t t) {
    std::vector<double> vals(static_cast<std::size_t>(num_coeffs));
    for (int k = 0; k < half; ++k) {
      vals[static_cast<std::size_t>(2 * k)] = re[static_cast<std::size_t>(k)];
      if (2 * k + 1 < num_coeffs)
        vals[static_cast<std::size_t>(2 * k + 1)] = im[static_cast<std::size_t>(k)];
    }
    out[t] = std::move(vals);
  };

  emit(0);
  for (std::size_t t = 1; t < num_windows; ++t) {
    const double drop = series[t - 1];
    const double add = series[t + static_cast<std::size_t>(window_len) - 1];
    for (int k = 0; k < half; ++k) {
      // X_k <- e^(2 pi i k / l) * (X_k - dropped + added)
      const double r = re[static_cast<std::size_t>(k)] - drop + add;
      const double m = im[static_cast<std::size_t>(k)];
      re[static_cast<std::size_t>(k)] =
          r * tw_re[static_cast<std::size_t>(k)] - m * tw_im[static_cast<std::size_t>(k)];
      im[static_cast<std::size_t>(k)] =
          r * tw_im[static_cast<std::size_t>(k)] + m * tw_re[static_cast<std::size_t>(k)];
    }
    emit(t);
  }
  return out;
}

std::vector<std::vector<double>> mcb_fit(const std::vector<std::vector<double>>& windows,
                                         int alphabet) {
  if (windows.empty()) throw std::invalid_argument("mcb_fit: no training windows");
  if (alphabet < 2 || alphabet > 26)
    throw std::invalid_argument("alphabet size must be in [2, 26]");

  const std::size_t positions = windows.front().size();
  const std::size_t n = windows.size();
  for (const auto& w : windows)
    if (w.size() != positions)
      throw std::invalid_argument("mcb_fit: training windows differ in length");
  std::vector<std::vector<double>> bins(positions);
  std::vector<double> column(n);

  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t i = 0; i < n; ++i) column[i] = windows[i][p];
    std::sort(column.begin(), column.end());

    std::vector<double>& edges = bins[p];
    edges.resize(static_cast<std::size_t>(alphabet - 1));
    for (int j = 1; j < alphabet; ++j) {
      // edge at the j/alphabet quantile: midpoint of the order statistics
      // flanking position j*n/alphabet, so edges sit between training
      // values rather than on them
      const std::size_t num = static_cast<std::size_t>(j) * n;
      const std::size_t m =
          std::clamp<std::size_t>(num / static_cast<std::size_t>(alphabet), 1,
                                  n > 1 ? n - 1 : 1);
      edges[static_cast<std::size_t>(j - 1)] =
          n > 1 ? 0.5 * (column[m - 1] + column[m]) : column.front();
    }
  }
  return bins;
}

std::string sfa_word(std::span<const double> segment, const ReprConfig& config) {
  if (!config.fitted()) throw StateError("sfa_word: config has no fitted bins");
  if (static_cast<int>(segment.size()) != config.window_len)
    throw std::invalid_argument("segment length does not match window length");
  const std::vector<double> vals = dft_truncated(segment, coeff_values_needed(config));
  return discretize_word(vals, config);
}

SymbolicSequence transform_series(std::span<const double> series, const ReprConfig& config) {
  check_window_fits(series.size(), config);
  if (config.transform == TransformKind::Sax) return sax_transform_series(series, config);
  if (!config.fitted()) throw StateError("transform_series: SFA config has no fitted bins");
  const auto windows = sliding_dft_windows(series, config.window_len,
                                           coeff_values_needed(config));
  return sfa_discretize_windows(windows, config);
}

std::pair<ReprConfig, std::vector<SymbolicSequence>>
fit_transform_dataset(const TimeSeriesDataset& dataset, const ReprConfig& config) {
  if (dataset.size() == 0) throw std::invalid_argument("empty dataset");
  check_window_fits(dataset.length(), config);

  if (config.transform == TransformKind::Sax) {
    std::vector<SymbolicSequence> seqs;
    seqs.reserve(dataset.size());
    for (const auto& s : dataset.series) seqs.push_back(sax_transform_series(s, config));
    return {config, std::move(seqs)};
  }

  // SFA: one pass computing every window's spectrum, bins from all training
  // windows, then discretize the cached spectra
  const int values = coeff_values_needed(config);
  std::vector<std::vector<std::vector<double>>> all(dataset.size());
  std::vector<std::vector<double>> pooled;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    all[i] = sliding_dft_windows(dataset.series[i], config.window_len, values);
    pooled.insert(pooled.end(), all[i].begin(), all[i].end());
  }

  ReprConfig fitted = config;
  const int skip = config.drop_dc ? 2 : 0;
  if (skip > 0)
    for (auto& v : pooled) v.erase(v.begin(), v.begin() + skip);
  fitted.bins = mcb_fit(pooled, config.alphabet);

  std::vector<SymbolicSequence> seqs;
  seqs.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    seqs.push_back(sfa_discretize_windows(all[i], fitted));
  return {std::move(fitted), std::move(seqs)};
}

std::vector<SymbolicSequence> transform_dataset(const TimeSeriesDataset& dataset,
                                                const ReprConfig& config) {
  if (!config.fitted())
    throw StateError("transform_dataset: config has no fitted bins");
  check_window_fits(dataset.length(), config);
  std::vector<SymbolicSequence> seqs;
  seqs.reserve(dataset.size());
  for (const auto& s : dataset.series) seqs.push_back(transform_series(s, config));
  return seqs;
}

std::string format_sequences(const std::vector<SymbolicSequence>& sequences) {
  std::ostringstream out;
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ' ';
      out << seq[i];
    }
    out << '\n';
  }
  return out.str();
}

} // namespace mrsqm
