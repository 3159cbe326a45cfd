#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iclabel/topomap.hpp"
#include "support/oracles.hpp"

using namespace iclabel;
using namespace iclabel::topomap;
using dataset::ChannelLoc;

namespace {

std::vector<ChannelLoc> ring_montage(int n, double radius) {
  std::vector<ChannelLoc> locs;
  for (int i = 0; i < n; ++i) {
    ChannelLoc c;
    c.theta = 360.0 * i / n;
    c.radius = radius;
    c.has_position = true;
    locs.push_back(c);
  }
  return locs;
}

ElectrodePlane random_plane(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> rad(0.02, 0.49);
  ElectrodePlane p;
  for (int i = 0; i < n; ++i) {
    double a = ang(rng), r = rad(rng);
    p.x.push_back(r * std::cos(a));
    p.y.push_back(r * std::sin(a));
    p.kept_indices.push_back(i);
  }
  return p;
}

}  // namespace

TEST_CASE("vertex electrode maps to the origin for any theta") {
  for (double theta : {0.0, 37.0, -120.0, 270.0}) {
    std::vector<ChannelLoc> locs = ring_montage(3, 0.4);
    locs.push_back({"vertex", theta, 0.0, true});
    ElectrodePlane p = project_electrodes(locs);
    std::size_t last = p.x.size() - 1;
    CHECK(p.x[last] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.y[last] == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("antipodal electrodes project to antipodal points") {
  std::vector<ChannelLoc> locs = {{"a", 0.0, 0.3, true},
                                  {"b", 180.0, 0.3, true},
                                  {"c", 90.0, 0.2, true}};
  ElectrodePlane p = project_electrodes(locs);
  CHECK(p.x[0] == doctest::Approx(-p.x[1]).epsilon(1e-12));
  CHECK(p.y[0] == doctest::Approx(-p.y[1]).epsilon(1e-12));
  CHECK(std::hypot(p.x[0], p.y[0]) ==
        doctest::Approx(std::hypot(p.x[1], p.y[1])).epsilon(1e-12));
}

TEST_CASE("squeeze puts the outermost electrode at the documented radius") {
  // max radius 0.4 -> plot radius 0.5 (floor), squeeze 1.0
  ElectrodePlane p = project_electrodes(ring_montage(8, 0.4));
  double max_r = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i)
    max_r = std::max(max_r, std::hypot(p.x[i], p.y[i]));
  CHECK(max_r == doctest::Approx(0.4 * kDiskRadius / 0.5).epsilon(1e-12));

  // max radius 0.8 -> plot radius 0.816, squeeze 0.5/0.816
  ElectrodePlane q = project_electrodes(ring_montage(8, 0.8));
  max_r = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    max_r = std::max(max_r, std::hypot(q.x[i], q.y[i]));
  CHECK(max_r == doctest::Approx(0.8 * kDiskRadius / (0.8 * 1.02)).epsilon(1e-12));
}

TEST_CASE("unpositioned channels are dropped; too few is an error") {
  std::vector<ChannelLoc> locs = ring_montage(4, 0.3);
  locs[1].has_position = false;
  ElectrodePlane p = project_electrodes(locs);
  CHECK(p.count() == 3);
  CHECK(p.kept_indices == std::vector<Index>{0, 2, 3});

  locs[2].has_position = false;
  try {
    project_electrodes(locs);
    FAIL("expected TooFewElectrodes");
  } catch (const error& e) {
    CHECK(e.kind() == "TooFewElectrodes");
  }
}

TEST_CASE("coincident electrodes are rejected") {
  std::vector<ChannelLoc> locs = ring_montage(3, 0.3);
  locs.push_back(locs[0]);
  try {
    project_electrodes(locs);
    FAIL("expected DuplicatePosition");
  } catch (const error& e) {
    CHECK(e.kind() == "DuplicatePosition");
  }
}

TEST_CASE("spline passes through its data points") {
  std::mt19937 rng(31);
  std::normal_distribution<double> gauss;
  ElectrodePlane p = random_plane(rng, 12);
  Vec v(12);
  for (Index i = 0; i < 12; ++i) v[i] = gauss(rng);
  ScalpGrid grid = biharmonic_interpolate(p, v);
  (void)grid;
  Vec w = oracles::spline_weights(p.x, p.y, v);
  for (Index i = 0; i < 12; ++i) {
    double back = oracles::spline_eval(p.x, p.y, w, p.x[static_cast<std::size_t>(i)],
                                       p.y[static_cast<std::size_t>(i)]);
    CHECK(back == doctest::Approx(v[i]).epsilon(1e-6));
  }
}

TEST_CASE("grid equals the independent dense-solve oracle") {
  std::mt19937 rng(47);
  std::normal_distribution<double> gauss;
  ElectrodePlane p = random_plane(rng, 10);
  Vec v(10);
  for (Index i = 0; i < 10; ++i) v[i] = gauss(rng);
  ScalpGrid grid = biharmonic_interpolate(p, v);
  Vec w = oracles::spline_weights(p.x, p.y, v);
  double step = 2.0 * kDiskRadius / (kGridSize - 1);
  for (int gi = 0; gi < kGridSize; ++gi)
    for (int gj = 0; gj < kGridSize; ++gj) {
      double gy = -kDiskRadius + gi * step;
      double gx = -kDiskRadius + gj * step;
      if (!grid.inside_mask(gi, gj)) {
        CHECK(grid.values(gi, gj) == 0.0);
        continue;
      }
      double expect = oracles::spline_eval(p.x, p.y, w, gx, gy);
      CHECK(grid.values(gi, gj) == doctest::Approx(expect).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("antisymmetric data on a mirrored montage gives an antisymmetric grid") {
  // electrodes mirrored about the y axis, values negated across the mirror
  ElectrodePlane p;
  std::vector<std::pair<double, double>> base = {
      {0.1, 0.05}, {0.3, -0.2}, {0.25, 0.31}, {0.05, -0.4}};
  Vec v(8);
  int k = 0;
  for (auto [x, y] : base) {
    p.x.push_back(x);
    p.y.push_back(y);
    p.kept_indices.push_back(k);
    v[k++] = 0.7 + 0.1 * k;
    p.x.push_back(-x);
    p.y.push_back(y);
    p.kept_indices.push_back(k);
    v[k] = -v[k - 1];
    ++k;
  }
  ScalpGrid grid = biharmonic_interpolate(p, v);
  for (int gi = 0; gi < kGridSize; ++gi)
    for (int gj = 0; gj < kGridSize; ++gj) {
      int mj = kGridSize - 1 - gj;  // x -> -x
      CHECK(grid.values(gi, gj) ==
            doctest::Approx(-grid.values(gi, mj)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("interpolation is linear in the data") {
  std::mt19937 rng(53);
  std::normal_distribution<double> gauss;
  ElectrodePlane p = random_plane(rng, 9);
  Vec u(9), v(9);
  for (Index i = 0; i < 9; ++i) {
    u[i] = gauss(rng);
    v[i] = gauss(rng);
  }
  double a = 1.3, b = -0.6;
  Mat lhs = biharmonic_interpolate(p, a * u + b * v).values;
  Mat rhs = a * biharmonic_interpolate(p, u).values +
            b * biharmonic_interpolate(p, v).values;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("permuting electrodes leaves the grid unchanged") {
  std::mt19937 rng(59);
  std::normal_distribution<double> gauss;
  ElectrodePlane p = random_plane(rng, 7);
  Vec v(7);
  for (Index i = 0; i < 7; ++i) v[i] = gauss(rng);
  ElectrodePlane q;
  std::vector<int> perm = {3, 0, 6, 2, 5, 1, 4};
  Vec vq(7);
  for (int i = 0; i < 7; ++i) {
    q.x.push_back(p.x[static_cast<std::size_t>(perm[i])]);
    q.y.push_back(p.y[static_cast<std::size_t>(perm[i])]);
    q.kept_indices.push_back(i);
    vq[i] = v[perm[i]];
  }
  Mat a = biharmonic_interpolate(p, v).values;
  Mat b = biharmonic_interpolate(q, vq).values;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mask depends only on geometry") {
  std::mt19937 rng(61);
  std::normal_distribution<double> gauss;
  ElectrodePlane p = random_plane(rng, 6);
  Vec u(6), v(6);
  for (Index i = 0; i < 6; ++i) {
    u[i] = gauss(rng);
    v[i] = gauss(rng);
  }
  ScalpGrid a = biharmonic_interpolate(p, u);
  ScalpGrid b = biharmonic_interpolate(p, v);
  CHECK((a.inside_mask == b.inside_mask).all());
}

TEST_CASE("constant winv column gives an all-zero grid after average reference") {
  dataset::EegDataset ds;
  ds.n_chan = 6;
  ds.srate = 100;
  ds.pnts = 4;
  ds.trials = 1;
  ds.data = Tensor3(6, 4, 1);
  ds.chanlocs = ring_montage(6, 0.4);
  ds.ica.weights = Mat::Identity(6, 6);
  ds.ica.sphere = Mat::Identity(6, 6);
  ds.ica.winv = Mat::Zero(6, 2);
  ds.ica.winv.col(0).setConstant(3.7);
  std::mt19937 rng(67);
  std::normal_distribution<double> gauss;
  for (Index i = 0; i < 6; ++i) ds.ica.winv(i, 1) = gauss(rng);
  for (Index i = 0; i < 6; ++i) ds.ica.ica_chan_indices.push_back(i);

  ScalpGrid zero = topo_feature(ds, 0);
  CHECK(zero.values.cwiseAbs().maxCoeff() < 1e-12);

  // scaling a winv column by 2 scales the raw grid by exactly 2
  ScalpGrid one = topo_feature(ds, 1);
  ds.ica.winv.col(1) *= 2.0;
  ScalpGrid two = topo_feature(ds, 1);
  CHECK((two.values - 2.0 * one.values).cwiseAbs().maxCoeff() < 1e-9);
}
