#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrsqm/dataset.hpp"

namespace mrsqm {

enum class TransformKind { Sax, Sfa };

// One symbolic representation: transform kind, window/word/alphabet sizes,
// and (for SFA) the per-coefficient bin edges fitted on training data.
struct ReprConfig {
  TransformKind transform = TransformKind::Sfa;
  int window_len = 0; // sliding window length, samples
  int word_len = 0;   // symbols per word
  int alphabet = 0;   // distinct symbols, 'a' upward, 2..26
  bool numerosity_reduction = true;
  bool drop_dc = false; // SFA: skip the DC (re, im) pair of the spectrum

  // SFA fitted state: word_len rows of (alphabet - 1) non-decreasing edges.
  std::vector<std::vector<double>> bins;

  bool fitted() const {
    return transform == TransformKind::Sax || !bins.empty();
  }
};

// Output of one representation applied to one series.
using SymbolicSequence = std::vector<std::string>;

// Draws ceil(k * log2(L)) configurations. Window lengths sit on an
// exponential grid from 8 (or L, if shorter) up to L; word lengths are
// sampled from {6,8,10,12,14,16} and clamped to the window; alphabet sizes
// from {3,4,5,6}. Deterministic in (seed, kind): each config draws from its
// own substream, so results do not depend on evaluation order.
std::vector<ReprConfig> sample_configs(std::size_t series_len, int k, TransformKind kind,
                                       std::uint64_t seed);

// Number of representations sample_configs will return for (L, k).
std::size_t num_representations(std::size_t series_len, int k);

// Shifts/scales to mean 0, population std 1. Segments with std below 1e-8
// map to the zero vector.
std::vector<double> znormalize(std::span<const double> segment);

// Piecewise aggregate approximation. Frame j of the output is the exact mean
// of the piecewise-constant input signal over [j*l/w, (j+1)*l/w); boundary
// samples are weighted by their fractional overlap.
std::vector<double> paa(std::span<const double> segment, int word_len);

// Standard-normal quantiles at i/alphabet, i = 1..alphabet-1 (the SAX
// equi-probability breakpoints).
std::vector<double> sax_breakpoints(int alphabet);

// Bin index for a value against non-decreasing edges: the count of edges
// strictly below the value, so a value equal to an edge falls in the lower
// bin and values beyond the last edge get the last symbol.
int symbol_index(double value, std::span<const double> edges);

// z-normalize, PAA, then discretize against the Gaussian breakpoints.
std::string sax_word(std::span<const double> segment, int word_len, int alphabet);

// First ceil(num_coeffs / 2) DFT coefficients X_k = sum_t x_t e^(-2pi i k t / l)
// (unnormalized), flattened as (re, im) pairs and truncated to exactly
// num_coeffs values.
std::vector<double> dft_truncated(std::span<const double> segment, int num_coeffs);

// Truncated DFTs of every length-window_len sliding window of the series,
// computed incrementally: one direct transform for the first window, then an
// O(num_coeffs) update per step.
std::vector<std::vector<double>> sliding_dft_windows(std::span<const double> series,
                                                     int window_len, int num_coeffs);

// Equi-depth binning: for each coefficient position, alphabet-1 edges at the
// j/alphabet quantiles of the training values, each edge the midpoint of the
// two order statistics flanking the quantile position.
std::vector<std::vector<double>> mcb_fit(const std::vector<std::vector<double>>& windows,
                                         int alphabet);

// Truncated DFT of the segment discretized against the fitted bins.
std::string sfa_word(std::span<const double> segment, const ReprConfig& config);

// Slides a stride-1 window over the series and emits one word per window;
// numerosity reduction collapses runs of consecutive identical words.
SymbolicSequence transform_series(std::span<const double> series, const ReprConfig& config);

// Fits discretization state on the training set (SFA bins; SAX has none) and
// transforms it. transform_dataset applies a frozen config to unseen series.
std::pair<ReprConfig, std::vector<SymbolicSequence>>
fit_transform_dataset(const TimeSeriesDataset& dataset, const ReprConfig& config);

std::vector<SymbolicSequence> transform_dataset(const TimeSeriesDataset& dataset,
                                                const ReprConfig& config);

// Debug dump: one line per series, words space-separated.
std::string format_sequences(const std::vector<SymbolicSequence>& sequences);

} // namespace mrsqm
