#pragma once

#include <array>
#include <string>
#include <vector>

#include "iclabel/matreader.hpp"
#include "iclabel/types.hpp"

namespace iclabel::network {

inline constexpr int kNumClasses = 7;
inline constexpr double kLeakySlope = 0.2;

struct ConvSpec {
  std::string name;
  Index in_channels;
  Index out_channels;
  Index kernel_h;
  Index kernel_w;
  Index stride;
  Index pad_h;
  Index pad_w;
  bool followed_by_lrelu;
};

// The fixed architecture: three branch stacks plus the discriminator conv.
const std::vector<ConvSpec>& architecture();

struct ConvLayer {
  ConvSpec spec;
  // kernels[oc * in + ic] is a kernel_h x kernel_w matrix
  std::vector<Mat> kernels;
  Vec bias;
};

struct NetworkWeights {
  std::vector<ConvLayer> layers;  // ordered as architecture()

  const ConvLayer& layer(const std::string& name) const;
};

struct FeatureBatch {
  // per component: topo 32x32 grid, psd 100 values, acf 100 values
  std::vector<Mat> topo;
  std::vector<Vec> psd;
  std::vector<Vec> acf;

  Index size() const { return static_cast<Index>(topo.size()); }
};

struct Probabilities {
  Mat table;  // n x 7, rows sum to 1
};

// Single image as channel-major planes.
using Planes = std::vector<Mat>;

// Cross-correlation conv2d with stride and zero padding, then optional
// leaky ReLU.
Planes conv_forward(const ConvLayer& layer, const Planes& input);

// Load `<name>_weight` / `<name>_bias` variables, validated against the
// architecture fingerprint.
// Errors: MissingLayer, ShapeMismatch, NonFinite.
NetworkWeights load_weights(const matreader::MatFile& file);

// Full Table-1 forward pass producing 7 logits per component.
Mat forward(const NetworkWeights& w, const FeatureBatch& b);

Probabilities softmax7(const Mat& logits);

// Averages softmax(forward(.)) over the four topo variants
// {topo, -topo, mirror(topo), -mirror(topo)}, PSD/ACF unchanged.
Probabilities infer_augmented(const NetworkWeights& w, const FeatureBatch& b);

}  // namespace iclabel::network
