#pragma once

#include <string>
#include <vector>

#include "iclabel/dataset.hpp"
#include "iclabel/network.hpp"
#include "iclabel/types.hpp"

namespace iclabel::pipeline {

struct CompatFlags {
  bool reference_compat = false;  // reference segment subset / dispatch rule
  bool augmentation = true;       // 4-variant averaged inference
};

// Network-native class order; names frozen against the reference weights.
const std::vector<std::string>& class_names();

struct ComponentFailure {
  Index component;
  std::string kind;
  std::string message;
};

struct ClassificationRow {
  Vec probabilities;  // 7 values, network-native order; NaN markers on failure
  int argmax = -1;    // -1 for failed components
  bool failed = false;
};

struct ClassificationTable {
  std::vector<ClassificationRow> rows;
  std::vector<ComponentFailure> failures;
};

// Per-component topo/psd/acf features, normalized: topo and psd divided by
// their own max |value|, then every feature scaled by 0.99.
// Component-level failures are collected into `failures`; their feature rows
// are filled with zeros and excluded from inference.
network::FeatureBatch extract_features(const dataset::EegDataset& ds,
                                       const CompatFlags& flags,
                                       std::vector<ComponentFailure>& failures,
                                       int threads = 0);

ClassificationTable classify(const dataset::EegDataset& ds,
                             const network::NetworkWeights& w,
                             const CompatFlags& flags, int threads = 0);

}  // namespace iclabel::pipeline
