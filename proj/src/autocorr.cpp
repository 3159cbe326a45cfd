#include "iclabel/autocorr.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numeric>

namespace iclabel::autocorr {

namespace {

constexpr double kPi = 3.14159265358979323846;

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

double bessel_i0(double x) {
  // series expansion; converges quickly for the beta values used here
  double sum = 1.0, term = 1.0;
  double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Averaged FFT autocovariance over equal-length records (columns), cut to
// lags 0..srate (zero-filled when records are shorter), lag-0 normalized,
// resampled to 100 Hz, lag 0 dropped.
Vec acf_core(const Mat& records, double srate) {
  Index len = records.rows();
  Index n_rec = records.cols();
  Index nfft = next_pow2(2 * len - 1);

  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(nfft), 0.0);
  std::vector<std::complex<double>> spec;
  Vec mean_power = Vec::Zero(nfft);
  for (Index r = 0; r < n_rec; ++r) {
    for (Index i = 0; i < len; ++i) buf[static_cast<std::size_t>(i)] = records(i, r);
    for (Index i = len; i < nfft; ++i) buf[static_cast<std::size_t>(i)] = 0.0;
    fft.fwd(spec, buf);
    for (Index i = 0; i < nfft; ++i)
      mean_power[i] += std::norm(spec[static_cast<std::size_t>(i)]);
  }
  mean_power /= static_cast<double>(n_rec);

  std::vector<std::complex<double>> pow_c(static_cast<std::size_t>(nfft));
  for (Index i = 0; i < nfft; ++i) pow_c[static_cast<std::size_t>(i)] = mean_power[i];
  std::vector<std::complex<double>> ac_c;
  fft.inv(ac_c, pow_c);

  Index sr = static_cast<Index>(std::llround(srate));
  Index n_lags = std::min<Index>(sr, len - 1);
  Vec ac = Vec::Zero(sr + 1);  // missing long lags stay zero
  for (Index i = 0; i <= n_lags; ++i)
    ac[i] = ac_c[static_cast<std::size_t>(i)].real();

  if (ac[0] == 0.0) throw error("ZeroVariance", "zero-variance activation");
  ac /= ac[0];

  Vec resampled = resample_100(ac, srate);
  return resampled.segment(1, kAcfLags);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::fftw:
      return "fftw";
    case Variant::welch:
      return "welch";
    case Variant::direct:
      return "direct";
  }
  return "?";
}

Variant acf_dispatch(Index pnts, Index trials, double srate,
                     bool reference_compat) {
  if (trials > 1) return Variant::fftw;
  if (reference_compat) {
    // raw-duration rule used by folklore reference code
    return static_cast<double>(pnts) / srate > 5.0 ? Variant::welch
                                                   : Variant::direct;
  }
  Index epochs = static_cast<Index>(
      std::floor(static_cast<double>(pnts) / (3.0 * srate)));
  return epochs > 5 ? Variant::welch : Variant::direct;
}

AcfFeature acf_fftw(const Mat& activation, double srate) {
  AcfFeature f;
  f.variant = Variant::fftw;
  f.values = acf_core(activation, srate);
  return f;
}

AcfFeature acf_direct(const Vec& activation, double srate) {
  AcfFeature f;
  f.variant = Variant::direct;
  f.values = acf_core(activation, srate);
  return f;
}

AcfFeature acf_welch(const Vec& activation, double srate) {
  Index sr = static_cast<Index>(std::llround(srate));
  Index win = std::min<Index>(activation.size(), 3 * sr);
  Index hop = std::max<Index>(win / 2, 1);
  Index n_win = 0;
  for (Index s = 0; s + win <= activation.size(); s += hop) ++n_win;
  Mat windows(win, n_win);
  Index col = 0;
  for (Index s = 0; s + win <= activation.size(); s += hop)
    windows.col(col++) = activation.segment(s, win);
  AcfFeature f;
  f.variant = Variant::welch;
  f.values = acf_core(windows, srate);
  return f;
}

AcfFeature acf_feature(const Mat& activation, double srate, bool reference_compat) {
  Variant v = acf_dispatch(activation.rows(), activation.cols(), srate,
                           reference_compat);
  switch (v) {
    case Variant::fftw:
      return acf_fftw(activation, srate);
    case Variant::welch:
      return acf_welch(activation.col(0), srate);
    case Variant::direct:
      return acf_direct(activation.col(0), srate);
  }
  throw error("ShapeMismatch", "unreachable dispatch");
}

Vec resample_100(const Vec& series, double srate) {
  if (srate <= 0) throw error("ShapeMismatch", "non-positive sampling rate");
  Index sr = static_cast<Index>(std::llround(srate));
  auto fit_101 = [](Vec v) {
    Vec out(101);
    Index n = std::min<Index>(v.size(), 101);
    out.head(n) = v.head(n);
    for (Index i = n; i < 101; ++i) out[i] = n > 0 ? v[n - 1] : 0.0;
    return out;
  };
  if (sr == 100) return fit_101(series);  // unity ratio, bit-exact passthrough

  Index up = 100, down = sr;
  Index g = std::gcd(up, down);
  up /= g;
  down /= g;
  Index max_rate = std::max(up, down);
  Index half = 10 * max_rate;  // 10 zero-crossings per side
  double fc = 1.0 / static_cast<double>(max_rate);
  double beta = 5.0;

  Vec taps(2 * half + 1);
  double i0_beta = bessel_i0(beta);
  for (Index k = 0; k <= 2 * half; ++k) {
    double t = static_cast<double>(k - half) / static_cast<double>(half);
    double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - t * t))) / i0_beta;
    taps[k] = sinc(fc * static_cast<double>(k - half)) * w;
  }
  taps *= static_cast<double>(up) / taps.sum();  // unit DC gain, times up

  Index n_in = series.size();
  Index n_out = (n_in * up + down - 1) / down;
  Vec out = Vec::Zero(n_out);
  for (Index m = 0; m < n_out; ++m) {
    // y[m] = sum_n x[n] h[m*down + half - n*up]
    Index center = m * down + half;
    Index n_lo = std::max<Index>(0, (center - 2 * half + up - 1) / up);
    Index n_hi = std::min<Index>(n_in - 1, center / up);
    double acc = 0.0;
    for (Index n = n_lo; n <= n_hi; ++n) acc += series[n] * taps[center - n * up];
    out[m] = acc;
  }
  return fit_101(out);
}

}  // namespace iclabel::autocorr
