#pragma once

#include <vector>

#include "iclabel/types.hpp"

namespace iclabel::spectral {

inline constexpr int kPsdBins = 100;

struct PsdFeature {
  Vec values;      // 100 log-power values (dB)
  Index nfreqs = 0;  // min(floor(srate/2), 100); bins beyond replicate the last
};

// Deterministic segment subset used by the reference pipeline: a fixed-seed
// Mersenne-Twister ordering of n_segments draws, keeping ceil(0.95 * n).
// Returned indices are sorted.
std::vector<Index> reference_segment_subset(Index n_segments);

// Welch-style median log-PSD of one component activation (pnts x trials).
// reference_compat selects the deterministic 95% segment subset; otherwise
// all segments are used.
// Errors: TooShort, DegenerateSignal.
PsdFeature psd_feature(const Mat& activation, double srate, bool reference_compat);

}  // namespace iclabel::spectral
