#include "iclabel/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace iclabel::spectral {

namespace {

constexpr double kPi = 3.14159265358979323846;

double median(std::vector<double>& xs) {
  std::size_t n = xs.size();
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  double hi = xs[n / 2];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(xs.begin(), xs.begin() + n / 2);
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Index> reference_segment_subset(Index n_segments) {
  // seed and draw-ordering fixed by the reference pipeline
  std::mt19937 rng(435656);
  std::vector<std::uint32_t> draws(static_cast<std::size_t>(n_segments));
  for (auto& d : draws) d = rng();
  std::vector<Index> perm(static_cast<std::size_t>(n_segments));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Index a, Index b) {
    return draws[static_cast<std::size_t>(a)] < draws[static_cast<std::size_t>(b)];
  });
  Index keep = static_cast<Index>(
      std::ceil(0.95 * static_cast<double>(n_segments)));
  perm.resize(static_cast<std::size_t>(std::max<Index>(keep, 1)));
  std::sort(perm.begin(), perm.end());
  return perm;
}

PsdFeature psd_feature(const Mat& activation, double srate, bool reference_compat) {
  Index pnts = activation.rows();
  Index trials = activation.cols();
  if (pnts < 4) throw error("TooShort", "need at least 4 samples per trial");
  if (srate < 2) throw error("TooShort", "sampling rate below 2 Hz");
  if (activation.cwiseAbs().maxCoeff() == 0.0)
    throw error("DegenerateSignal", "all-zero activation");

  Index nfreqs = std::min<Index>(static_cast<Index>(std::floor(srate / 2.0)),
                                 kPsdBins);
  Index seg_len = std::min<Index>(pnts, static_cast<Index>(srate));
  Index hop = seg_len / 2;
  if (hop < 1) hop = 1;

  Vec window(seg_len);
  for (Index k = 0; k < seg_len; ++k)
    window[k] = seg_len == 1
                    ? 1.0
                    : 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(k) /
                                             static_cast<double>(seg_len - 1));
  double win_energy = window.squaredNorm();

  // full segments only, gathered across all trials
  std::vector<Index> starts;
  for (Index s = 0; s + seg_len <= pnts; s += hop) starts.push_back(s);
  Index n_segments = static_cast<Index>(starts.size()) * trials;

  Index n_avail = std::min<Index>(nfreqs, seg_len / 2);
  Mat power(n_avail, n_segments);  // one-sided periodograms, bins 1..n_avail

  Eigen::FFT<double> fft;
  std::vector<double> seg(static_cast<std::size_t>(seg_len));
  std::vector<std::complex<double>> spec;
  Index col = 0;
  for (Index t = 0; t < trials; ++t) {
    for (Index s : starts) {
      for (Index k = 0; k < seg_len; ++k)
        seg[static_cast<std::size_t>(k)] = activation(s + k, t) * window[k];
      fft.fwd(spec, seg);
      for (Index f = 1; f <= n_avail; ++f)
        power(f - 1, col) = std::norm(spec[static_cast<std::size_t>(f)]) * 2.0 /
                            (srate * win_energy);
      if (n_avail == seg_len / 2 && seg_len % 2 == 0)
        power(n_avail - 1, col) /= 2.0;  // Nyquist bin is not doubled
      ++col;
    }
  }

  std::vector<Index> subset;
  if (reference_compat) {
    subset = reference_segment_subset(n_segments);
  } else {
    subset.resize(static_cast<std::size_t>(n_segments));
    std::iota(subset.begin(), subset.end(), Index{0});
  }

  PsdFeature out;
  out.nfreqs = nfreqs;
  out.values = Vec::Zero(kPsdBins);
  std::vector<double> bin(subset.size());
  for (Index f = 0; f < n_avail; ++f) {
    for (std::size_t i = 0; i < subset.size(); ++i)
      bin[i] = power(f, subset[i]);
    double med = median(bin);
    if (!(med > 0.0))
      throw error("DegenerateSignal",
                  "non-positive median power in bin " + std::to_string(f + 1));
    out.values[f] = 20.0 * std::log10(med);
  }
  for (Index f = n_avail; f < kPsdBins; ++f) out.values[f] = out.values[n_avail - 1];
  if (!out.values.allFinite())
    throw error("DegenerateSignal", "non-finite log-power values");
  return out;
}

}  // namespace iclabel::spectral
