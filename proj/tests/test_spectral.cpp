#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iclabel/spectral.hpp"
#include "support/oracles.hpp"

using namespace iclabel;
using namespace iclabel::spectral;

namespace {

Mat sinusoid(double freq, double srate, double seconds, double amp = 1.0) {
  Index n = static_cast<Index>(seconds * srate);
  Mat act(n, 1);
  for (Index i = 0; i < n; ++i)
    act(i, 0) = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / srate);
  return act;
}

}  // namespace

TEST_CASE("sinusoid peak lands in its frequency bin") {
  // oracle: the direct DFT of one full-length window peaks at the same bin
  Mat act = sinusoid(10.0, 128.0, 20.0);
  PsdFeature f = psd_feature(act, 128.0, false);
  Index peak = 0;
  f.values.head(f.nfreqs).maxCoeff(&peak);
  CHECK(peak + 1 == 10);  // values[k] holds bin k+1 Hz

  std::vector<double> x(static_cast<std::size_t>(act.rows()));
  for (Index i = 0; i < act.rows(); ++i) x[static_cast<std::size_t>(i)] = act(i, 0);
  auto spec = oracles::direct_dft(x);
  std::size_t oracle_peak = 1;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(x.size()) / 2; ++k)
    if (std::norm(spec[k]) > std::norm(spec[oracle_peak])) oracle_peak = k;
  double oracle_freq = static_cast<double>(oracle_peak) * 128.0 /
                       static_cast<double>(x.size());
  CHECK(static_cast<double>(peak + 1) == doctest::Approx(oracle_freq).epsilon(1e-9));
}

TEST_CASE("padding replicates the last real bin") {
  Mat act = sinusoid(5.0, 128.0, 10.0);
  PsdFeature f = psd_feature(act, 128.0, false);
  CHECK(f.nfreqs == 64);
  for (Index i = 64; i < 100; ++i) CHECK(f.values[i] == f.values[63]);
  CHECK(f.values.size() == 100);
  CHECK(f.values.allFinite());
}

TEST_CASE("amplitude scaling shifts every bin by the same dB constant") {
  Mat act = sinusoid(7.0, 100.0, 8.0);
  act.col(0) += 0.1 * sinusoid(23.0, 100.0, 8.0).col(0);
  PsdFeature a = psd_feature(act, 100.0, false);
  PsdFeature b = psd_feature(Mat(10.0 * act), 100.0, false);
  Vec shift = b.values - a.values;
  double first = shift[0];
  CHECK(first > 0.0);
  for (Index i = 0; i < a.nfreqs; ++i)
    CHECK(shift[i] == doctest::Approx(first).epsilon(1e-9));
}

TEST_CASE("white noise is flat within 1.5 dB std over bins 5..95") {
  std::mt19937 rng(435656);
  std::normal_distribution<double> gauss;
  Index n = 100 * 256;
  Mat act(n, 1);
  for (Index i = 0; i < n; ++i) act(i, 0) = gauss(rng);
  PsdFeature f = psd_feature(act, 256.0, false);
  CHECK(f.nfreqs == 100);
  auto seg = f.values.segment(4, 91);  // bins 5..95
  double mean = seg.mean();
  double sd = std::sqrt((seg.array() - mean).square().mean());
  CHECK(sd < 1.5);
}

TEST_CASE("errors: too short and degenerate input") {
  try {
    psd_feature(Mat::Ones(3, 1), 128.0, false);
    FAIL("expected TooShort");
  } catch (const error& e) {
    CHECK(e.kind() == "TooShort");
  }
  try {
    psd_feature(Mat::Zero(256, 2), 128.0, false);
    FAIL("expected DegenerateSignal");
  } catch (const error& e) {
    CHECK(e.kind() == "DegenerateSignal");
  }
}

TEST_CASE("reference segment subset is deterministic and ~95%") {
  auto a = reference_segment_subset(40);
  auto b = reference_segment_subset(40);
  CHECK(a == b);
  CHECK(a.size() == 38);  // ceil(0.95 * 40)
  CHECK(std::is_sorted(a.begin(), a.end()));
  for (Index i : a) CHECK((i >= 0 && i < 40));

  // compat flag changes which segments feed the median but stays deterministic
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss;
  Mat act(512, 4);
  for (Index i = 0; i < act.size(); ++i) act.data()[i] = gauss(rng);
  PsdFeature x = psd_feature(act, 128.0, true);
  PsdFeature y = psd_feature(act, 128.0, true);
  CHECK((x.values - y.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("epoched segments are gathered across trials") {
  // two trials with identical content give the same PSD as one trial
  Mat one = sinusoid(12.0, 128.0, 4.0);
  Mat two(one.rows(), 2);
  two.col(0) = one.col(0);
  two.col(1) = one.col(0);
  PsdFeature a = psd_feature(one, 128.0, false);
  PsdFeature b = psd_feature(two, 128.0, false);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
}
