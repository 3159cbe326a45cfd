#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "iclabel/dataset.hpp"
#include "support/mat_writer.hpp"
#include "support/test_util.hpp"

using namespace iclabel;
using namespace iclabel::dataset;

namespace {

PayloadLoader fixture_loader() {
  return [](const std::string& name) { return testutil::read_fixture(name); };
}

EegDataset load_synth() {
  auto file = matreader::parse_mat(testutil::read_fixture("synth.set"));
  return from_matfile(file, fixture_loader());
}

// identity-ICA dataset built through the test writer: 2 channels, 10 points
EegDataset identity_dataset() {
  testutil::MatWriter w;
  w.add_doubles("nbchan", {1, 1}, {2});
  w.add_doubles("srate", {1, 1}, {100});
  w.add_doubles("pnts", {1, 1}, {10});
  w.add_doubles("trials", {1, 1}, {1});
  std::vector<double> data;
  for (int i = 0; i < 20; ++i) data.push_back(i * 0.5 - 3.0);
  w.add_doubles("data", {2, 10}, data);
  w.add_doubles("icaweights", {2, 2}, {1, 0, 0, 1});
  w.add_doubles("icasphere", {2, 2}, {1, 0, 0, 1});
  w.add_doubles("icawinv", {2, 2}, {1, 0, 0, 1});
  auto file = matreader::parse_mat(w.bytes());
  return from_matfile(file, fixture_loader());
}

}  // namespace

TEST_CASE("synthetic .set with external payload loads fully") {
  EegDataset ds = load_synth();
  CHECK(ds.n_chan == 4);
  CHECK(ds.srate == 128.0);
  CHECK(ds.pnts == 256);
  CHECK(ds.trials == 3);
  CHECK(ds.data.dim0() == 4);
  CHECK(ds.data.dim1() == 256);
  CHECK(ds.data.dim2() == 3);
  CHECK(ds.chanlocs.size() == 4);
  CHECK(ds.chanlocs[0].label == "Fpz");
  CHECK(ds.chanlocs[1].radius == 0.0);
  CHECK(ds.chanlocs[3].theta == -45.0);
  for (const auto& loc : ds.chanlocs) CHECK(loc.has_position);
  CHECK(ds.ica.n_comp() == 4);
  CHECK(ds.ica.ica_chan_indices == std::vector<Index>{0, 1, 2, 3});
}

TEST_CASE("flat layout with embedded f32 data matches the sidecar layout") {
  EegDataset a = load_synth();
  auto file = matreader::parse_mat(testutil::read_fixture("synth_flat.set"));
  EegDataset b = from_matfile(file, fixture_loader());
  CHECK(a.n_chan == b.n_chan);
  CHECK(a.trials == b.trials);
  CHECK((a.data.flat() - b.data.flat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.ica.winv - b.ica.winv).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("payload values match the generator's record") {
  EegDataset ds = load_synth();
  // first_sample values frozen by the fixture generator
  auto expected = testutil::read_fixture("expected.json");
  std::string text(expected.begin(), expected.end());
  // cheap extraction without a JSON dependency in this test
  auto pos = text.find("\"first_sample\"");
  REQUIRE(pos != std::string::npos);
  for (Index ch = 0; ch < ds.n_chan; ++ch) {
    pos = text.find_first_of("-0123456789", text.find_first_of("[,", pos) + 1);
    double v = std::stod(text.substr(pos));
    CHECK(ds.data(ch, 0, 0) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("missing ICA matrices are an error") {
  auto file = matreader::parse_mat(testutil::read_fixture("synth_no_ica.set"));
  try {
    from_matfile(file, fixture_loader());
    FAIL("expected MissingField");
  } catch (const error& e) {
    CHECK(e.kind() == "MissingField");
  }
}

TEST_CASE("missing .fdt payload is reported") {
  auto file = matreader::parse_mat(testutil::read_fixture("synth.set"));
  auto loader = [](const std::string&) -> std::vector<std::uint8_t> {
    throw std::runtime_error("no such file");
  };
  try {
    from_matfile(file, loader);
    FAIL("expected PayloadMissing");
  } catch (const error& e) {
    CHECK(e.kind() == "PayloadMissing");
  }
}

TEST_CASE("identity ICA round-trips data into activations") {
  EegDataset ds = identity_dataset();
  Tensor3 act = ica_activations(ds);
  CHECK((act.flat() - ds.data.flat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal unmixing scales rows") {
  EegDataset ds = identity_dataset();
  ds.ica.weights << 2, 0, 0, 3;
  ds.data(0, 0, 0) = 1.0;
  ds.data(1, 0, 0) = 1.0;
  Tensor3 act = ica_activations(ds);
  CHECK(act(0, 0, 0) == 2.0);
  CHECK(act(1, 0, 0) == 3.0);
}

TEST_CASE("activations match a triple-loop oracle on a random case") {
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  Index n_chan = 4, n_comp = 3, pnts = 11, trials = 2;
  EegDataset ds;
  ds.n_chan = n_chan;
  ds.srate = 100;
  ds.pnts = pnts;
  ds.trials = trials;
  ds.data = Tensor3(n_chan, pnts, trials);
  for (Index i = 0; i < ds.data.size(); ++i) ds.data.flat()[i] = gauss(rng);
  ds.chanlocs.resize(4);
  ds.ica.weights = Mat::NullaryExpr(n_comp, n_chan, [&] { return gauss(rng); });
  ds.ica.sphere = Mat::NullaryExpr(n_chan, n_chan, [&] { return gauss(rng); });
  ds.ica.winv = Mat::Zero(n_chan, n_comp);
  for (Index i = 0; i < n_chan; ++i) ds.ica.ica_chan_indices.push_back(i);

  Tensor3 act = ica_activations(ds);
  Mat unmix(n_comp, n_chan);
  for (Index r = 0; r < n_comp; ++r)
    for (Index c = 0; c < n_chan; ++c) {
      double acc = 0.0;
      for (Index k = 0; k < n_chan; ++k)
        acc += ds.ica.weights(r, k) * ds.ica.sphere(k, c);
      unmix(r, c) = acc;
    }
  for (Index t = 0; t < trials; ++t)
    for (Index p = 0; p < pnts; ++p)
      for (Index c = 0; c < n_comp; ++c) {
        double acc = 0.0;
        for (Index k = 0; k < n_chan; ++k) acc += unmix(c, k) * ds.data(k, p, t);
        CHECK(act(c, p, t) == doctest::Approx(acc).epsilon(1e-12));
      }
}

TEST_CASE("ica_activations is linear in the data") {
  EegDataset x = identity_dataset();
  x.ica.weights << 1.5, -0.25, 0.75, 2.0;
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  EegDataset y = x;
  for (Index i = 0; i < x.data.size(); ++i) {
    x.data.flat()[i] = gauss(rng);
    y.data.flat()[i] = gauss(rng);
  }
  double a = 0.3, b = -1.7;
  EegDataset z = x;
  z.data.flat() = a * x.data.flat() + b * y.data.flat();
  Vec lhs = ica_activations(z).flat();
  Vec rhs = a * ica_activations(x).flat() + b * ica_activations(y).flat();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("loading the same bytes twice is deterministic") {
  EegDataset a = load_synth();
  EegDataset b = load_synth();
  CHECK((a.data.flat() - b.data.flat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.ica.weights - b.ica.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.chanlocs.size() == b.chanlocs.size());
}

TEST_CASE("channel subset decompositions scatter winv rows") {
  testutil::MatWriter w;
  w.add_doubles("nbchan", {1, 1}, {3});
  w.add_doubles("srate", {1, 1}, {100});
  w.add_doubles("pnts", {1, 1}, {4});
  w.add_doubles("trials", {1, 1}, {1});
  w.add_doubles("data", {3, 4}, std::vector<double>(12, 1.0));
  w.add_doubles("icaweights", {2, 2}, {1, 0, 0, 1});
  w.add_doubles("icasphere", {2, 2}, {1, 0, 0, 1});
  w.add_doubles("icawinv", {2, 2}, {1, 0, 0, 1});
  w.add_doubles("icachansind", {1, 2}, {1, 3});  // stored 1-based
  auto file = matreader::parse_mat(w.bytes());
  EegDataset ds = from_matfile(file, fixture_loader());
  CHECK(ds.ica.ica_chan_indices == std::vector<Index>{0, 2});
  CHECK(ds.ica.winv.rows() == 3);
  CHECK(ds.ica.winv(0, 0) == 1.0);
  CHECK(ds.ica.winv(1, 0) == 0.0);
  CHECK(ds.ica.winv(2, 1) == 1.0);
  Tensor3 act = ica_activations(ds);
  CHECK(act.dim0() == 2);
}
