#pragma once

#include <vector>

#include "iclabel/types.hpp"

namespace iclabel::autocorr {

inline constexpr int kAcfLags = 100;

enum class Variant { fftw, welch, direct };

std::string to_string(Variant v);

struct AcfFeature {
  Vec values;  // 100 lags at 10 ms .. 1000 ms after resampling to 100 Hz
  Variant variant = Variant::fftw;
};

// Variant selection. Epoched data always uses fftw. For continuous data the
// primary rule counts whole 3 s epochs (> 5 -> welch); reference_compat
// switches to the raw-duration rule (> 5 s -> welch) used by folklore code.
Variant acf_dispatch(Index pnts, Index trials, double srate,
                     bool reference_compat);

// Epoched records: per-trial FFT autocovariance averaged across trials.
// Errors: ZeroVariance.
AcfFeature acf_fftw(const Mat& activation, double srate);

// Single continuous record, whole-record FFT autocovariance.
AcfFeature acf_direct(const Vec& activation, double srate);

// Single continuous record sliced into 3 s windows with 50% overlap.
AcfFeature acf_welch(const Vec& activation, double srate);

AcfFeature acf_feature(const Mat& activation, double srate, bool reference_compat);

// Rational-rate polyphase resampling of a lag series from srate to 100 Hz
// with a Kaiser-windowed sinc filter (10 zero-crossings per side, beta 5).
// Output is trimmed/extended to exactly 101 lags (0..1 s).
Vec resample_100(const Vec& series, double srate);

}  // namespace iclabel::autocorr
