#pragma once

#include <vector>

#include "iclabel/dataset.hpp"
#include "iclabel/types.hpp"

namespace iclabel::topomap {

inline constexpr int kGridSize = 32;
// Head disk radius in plot units; the grid square spans +-kDiskRadius.
inline constexpr double kDiskRadius = 0.5;

struct ElectrodePlane {
  // planar coordinates after the squeeze rescale; x = nose direction
  std::vector<double> x;
  std::vector<double> y;
  std::vector<Index> kept_indices;  // original channel indices with positions

  Index count() const { return static_cast<Index>(x.size()); }
};

struct ScalpGrid {
  Mat values;  // 32x32; row i = grid y, column j = grid x
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> inside_mask;
};

// Polar (theta deg, radius) -> plane, dropping channels without positions,
// then rescaling so the montage fits the head disk:
//   plot_radius = clamp(max_radius * 1.02, 0.5, 1.0),
//   squeeze = kDiskRadius / plot_radius.
// Errors: TooFewElectrodes, DuplicatePosition.
ElectrodePlane project_electrodes(const std::vector<dataset::ChannelLoc>& chanlocs);

// Green's-function biharmonic spline through (plane, v), evaluated at the
// 32x32 cell centers; cells outside the head disk are zero and masked.
// Errors: SingularSystem.
ScalpGrid biharmonic_interpolate(const ElectrodePlane& plane, const Vec& v);

// Scalp map of one component: winv column restricted to positioned channels,
// average-referenced, then interpolated.
ScalpGrid topo_feature(const dataset::EegDataset& ds, Index comp);

}  // namespace iclabel::topomap
