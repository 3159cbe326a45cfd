#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iclabel/matreader.hpp"
#include "iclabel/types.hpp"

namespace iclabel::dataset {

struct ChannelLoc {
  std::string label;
  double theta = 0.0;   // polar azimuth, degrees, nose-referenced
  double radius = 0.0;  // head-model units, 0 = vertex
  bool has_position = false;
};

struct IcaDecomposition {
  Mat weights;  // n_comp x n_ica_chans
  Mat sphere;   // n_ica_chans x n_ica_chans
  Mat winv;     // n_chan x n_comp
  std::vector<Index> ica_chan_indices;  // 0-based

  Index n_comp() const { return weights.rows(); }
};

struct EegDataset {
  Index n_chan = 0;
  double srate = 0.0;
  Index pnts = 0;
  Index trials = 0;
  Tensor3 data;  // n_chan x pnts x trials
  std::vector<ChannelLoc> chanlocs;
  IcaDecomposition ica;
};

// Resolves an external payload file name (EEGLAB .fdt convention) to bytes.
using PayloadLoader = std::function<std::vector<std::uint8_t>(const std::string&)>;

// Build the typed dataset from a parsed .set file. Accepts both the flat
// top-level layout and the single `EEG` struct layout.
// Errors: MissingField, ShapeMismatch, PayloadMissing.
EegDataset from_matfile(const matreader::MatFile& file,
                        const PayloadLoader& payload_loader);

// Component activations: (weights * sphere) applied to the ICA channel rows
// of data, per trial. Errors: ShapeMismatch.
Tensor3 ica_activations(const EegDataset& ds);

}  // namespace iclabel::dataset
