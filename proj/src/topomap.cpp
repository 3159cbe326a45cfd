#include "iclabel/topomap.hpp"

#include <cmath>

namespace iclabel::topomap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// biharmonic Green's function, g(0) = 0 by convention
double green(double r) { return r == 0.0 ? 0.0 : r * r * (std::log(r) - 1.0); }

}  // namespace

ElectrodePlane project_electrodes(const std::vector<dataset::ChannelLoc>& chanlocs) {
  ElectrodePlane plane;
  double max_r = 0.0;
  for (std::size_t i = 0; i < chanlocs.size(); ++i) {
    const dataset::ChannelLoc& loc = chanlocs[i];
    if (!loc.has_position) continue;
    double th = loc.theta * kPi / 180.0;
    plane.x.push_back(loc.radius * std::cos(th));
    plane.y.push_back(loc.radius * std::sin(th));
    plane.kept_indices.push_back(static_cast<Index>(i));
    max_r = std::max(max_r, loc.radius);
  }
  double plot_radius = std::min(1.0, std::max(0.5, max_r * 1.02));
  double squeeze = kDiskRadius / plot_radius;

  // channels beyond the plot radius (possible once the cap bites) are dropped,
  // matching the reference behavior of plotting only locatable channels
  ElectrodePlane kept;
  for (Index i = 0; i < plane.count(); ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    if (std::hypot(plane.x[si], plane.y[si]) > plot_radius * (1.0 + 1e-12))
      continue;
    kept.x.push_back(plane.x[si] * squeeze);
    kept.y.push_back(plane.y[si] * squeeze);
    kept.kept_indices.push_back(plane.kept_indices[si]);
  }
  plane = std::move(kept);
  if (plane.count() < 3)
    throw error("TooFewElectrodes",
                "need at least 3 positioned channels inside the plot radius, have " +
                    std::to_string(plane.count()));

  for (Index j = 0; j < plane.count(); ++j)
    for (Index k = j + 1; k < plane.count(); ++k) {
      double dx = plane.x[static_cast<std::size_t>(j)] - plane.x[static_cast<std::size_t>(k)];
      double dy = plane.y[static_cast<std::size_t>(j)] - plane.y[static_cast<std::size_t>(k)];
      if (std::hypot(dx, dy) < 1e-9)
        throw error("DuplicatePosition",
                    "channels " + std::to_string(plane.kept_indices[static_cast<std::size_t>(j)]) +
                        " and " + std::to_string(plane.kept_indices[static_cast<std::size_t>(k)]) +
                        " coincide");
    }
  return plane;
}

ScalpGrid biharmonic_interpolate(const ElectrodePlane& plane, const Vec& v) {
  Index n = plane.count();
  if (v.size() != n)
    throw error("ShapeMismatch", "value count does not match electrode count");

  Mat g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      double dx = plane.x[static_cast<std::size_t>(j)] - plane.x[static_cast<std::size_t>(k)];
      double dy = plane.y[static_cast<std::size_t>(j)] - plane.y[static_cast<std::size_t>(k)];
      g(j, k) = green(std::hypot(dx, dy));
    }
  }

  Eigen::PartialPivLU<Mat> lu(g);
  Vec w = lu.solve(v);
  double resid = (g * w - v).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if (!w.allFinite() || resid > 1e-6 * scale)
    throw error("SingularSystem", "interpolation system is numerically singular");

  ScalpGrid grid;
  grid.values = Mat::Zero(kGridSize, kGridSize);
  grid.inside_mask.resize(kGridSize, kGridSize);
  double step = 2.0 * kDiskRadius / (kGridSize - 1);
  for (int gi = 0; gi < kGridSize; ++gi) {
    double gy = -kDiskRadius + gi * step;
    for (int gj = 0; gj < kGridSize; ++gj) {
      double gx = -kDiskRadius + gj * step;
      bool inside = std::hypot(gx, gy) <= kDiskRadius;
      grid.inside_mask(gi, gj) = inside;
      if (!inside) continue;
      double acc = 0.0;
      for (Index k = 0; k < n; ++k)
        acc += w[k] * green(std::hypot(gx - plane.x[static_cast<std::size_t>(k)],
                                       gy - plane.y[static_cast<std::size_t>(k)]));
      grid.values(gi, gj) = acc;
    }
  }
  if (!grid.values.allFinite())
    throw error("SingularSystem", "non-finite interpolated values");
  return grid;
}

ScalpGrid topo_feature(const dataset::EegDataset& ds, Index comp) {
  if (comp < 0 || comp >= ds.ica.n_comp())
    throw error("IndexOutOfRange", "component " + std::to_string(comp));
  ElectrodePlane plane = project_electrodes(ds.chanlocs);
  Vec v(plane.count());
  for (Index i = 0; i < plane.count(); ++i)
    v[i] = ds.ica.winv(plane.kept_indices[static_cast<std::size_t>(i)], comp);
  v.array() -= v.mean();  // average reference over positioned channels
  return biharmonic_interpolate(plane, v);
}

}  // namespace iclabel::topomap
