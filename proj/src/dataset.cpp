#include "iclabel/dataset.hpp"

#include <cmath>

namespace iclabel::dataset {

using matreader::MatFile;
using matreader::MatValue;

namespace {

// The EEGLAB container occurs in two layouts: one `EEG` struct variable, or
// its fields spread flat across the top level.
class FieldSource {
public:
  explicit FieldSource(const MatFile& file) : file_(file) {
    if (file.has("EEG") && file.var("EEG").is_struct()) root_ = &file.var("EEG").strct();
  }

  const MatValue* find(const std::string& name) const {
    if (root_) {
      if (!root_->has_field(name)) return nullptr;
      const MatValue& v = root_->field(name);
      return v.is_empty() ? nullptr : &v;
    }
    if (!file_.has(name)) return nullptr;
    const MatValue& v = file_.var(name);
    return v.is_empty() ? nullptr : &v;
  }

  const MatValue& require(const std::string& name) const {
    const MatValue* v = find(name);
    if (!v) throw error("MissingField", "dataset lacks field '" + name + "'");
    return *v;
  }

private:
  const MatFile& file_;
  const matreader::StructArray* root_ = nullptr;
};

Mat pseudo_inverse(const Mat& m) {
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

std::vector<ChannelLoc> read_chanlocs(const MatValue& v, Index n_chan) {
  const matreader::StructArray& sa = v.strct();
  if (static_cast<Index>(sa.element_count()) != n_chan)
    throw error("ShapeMismatch",
                "chanlocs has " + std::to_string(sa.element_count()) +
                    " entries for " + std::to_string(n_chan) + " channels");
  std::vector<ChannelLoc> locs(static_cast<std::size_t>(n_chan));
  for (Index i = 0; i < n_chan; ++i) {
    ChannelLoc& loc = locs[static_cast<std::size_t>(i)];
    if (sa.has_field("labels")) {
      const MatValue& lab = sa.field("labels", static_cast<std::size_t>(i));
      if (lab.is_char()) loc.label = lab.as_text();
    }
    if (sa.has_field("theta") && sa.has_field("radius")) {
      const MatValue& th = sa.field("theta", static_cast<std::size_t>(i));
      const MatValue& rd = sa.field("radius", static_cast<std::size_t>(i));
      if (th.is_numeric() && rd.is_numeric()) {
        double t = th.as_scalar();
        double r = rd.as_scalar();
        if (std::isfinite(t) && std::isfinite(r)) {
          loc.theta = t;
          loc.radius = r;
          loc.has_position = true;
        }
      }
    }
  }
  return locs;
}

}  // namespace

EegDataset from_matfile(const MatFile& file, const PayloadLoader& payload_loader) {
  FieldSource src(file);
  EegDataset ds;
  ds.n_chan = static_cast<Index>(src.require("nbchan").as_scalar());
  ds.srate = src.require("srate").as_scalar();
  ds.pnts = static_cast<Index>(src.require("pnts").as_scalar());
  ds.trials = static_cast<Index>(src.require("trials").as_scalar());
  if (ds.trials < 1 || ds.pnts < 1 || ds.srate <= 0 || ds.n_chan < 1)
    throw error("ShapeMismatch", "non-positive dataset dimensions");

  const MatValue& data_v = src.require("data");
  Index total = ds.pnts * ds.trials;
  if (data_v.is_char()) {
    // EEGLAB convention: `data` holds the name of a sidecar .fdt float file
    std::vector<std::uint8_t> bytes;
    try {
      bytes = payload_loader(data_v.as_text());
    } catch (const error&) {
      throw;
    } catch (const std::exception& e) {
      throw error("PayloadMissing", "cannot load '" + data_v.as_text() +
                                        "': " + e.what());
    }
    Mat flat = matreader::read_fdt(bytes, static_cast<std::size_t>(ds.n_chan),
                                   static_cast<std::size_t>(total));
    ds.data = Tensor3(ds.n_chan, ds.pnts, ds.trials);
    for (Index t = 0; t < ds.trials; ++t)
      ds.data.slab(t) = flat.middleCols(t * ds.pnts, ds.pnts);
  } else {
    Tensor3 t3 = data_v.as_tensor3();
    if (t3.dim0() != ds.n_chan || t3.dim1() * t3.dim2() != total)
      throw error("ShapeMismatch", "data extents do not match nbchan/pnts/trials");
    if (t3.dim1() == ds.pnts && t3.dim2() == ds.trials) {
      ds.data = std::move(t3);
    } else {
      // 2-D storage of an epoched set: columns run through trials
      ds.data = Tensor3(ds.n_chan, ds.pnts, ds.trials);
      ds.data.flat() = t3.flat();
    }
  }

  const MatValue* locs = src.find("chanlocs");
  if (locs && locs->is_struct()) {
    ds.chanlocs = read_chanlocs(*locs, ds.n_chan);
  } else {
    ds.chanlocs.resize(static_cast<std::size_t>(ds.n_chan));
  }

  const MatValue* w = src.find("icaweights");
  const MatValue* s = src.find("icasphere");
  if (!w) throw error("MissingField", "dataset lacks 'icaweights'");
  if (!s) throw error("MissingField", "dataset lacks 'icasphere'");
  ds.ica.weights = w->as_matrix();
  ds.ica.sphere = s->as_matrix();
  if (ds.ica.weights.cols() != ds.ica.sphere.rows() ||
      ds.ica.sphere.rows() != ds.ica.sphere.cols())
    throw error("ShapeMismatch", "icaweights/icasphere extents disagree");

  // stored 1-based channel indices become 0-based here, once
  if (const MatValue* ci = src.find("icachansind")) {
    Vec idx = ci->as_vector();
    for (Index i = 0; i < idx.size(); ++i) {
      Index k = static_cast<Index>(idx[i]) - 1;
      if (k < 0 || k >= ds.n_chan)
        throw error("ShapeMismatch", "icachansind entry out of range");
      ds.ica.ica_chan_indices.push_back(k);
    }
  } else {
    for (Index i = 0; i < ds.n_chan; ++i) ds.ica.ica_chan_indices.push_back(i);
  }
  Index n_ica = static_cast<Index>(ds.ica.ica_chan_indices.size());
  if (ds.ica.sphere.rows() != n_ica)
    throw error("ShapeMismatch", "icasphere extent does not match icachansind");

  Index n_comp = ds.ica.weights.rows();
  Mat winv;
  if (const MatValue* wv = src.find("icawinv")) {
    winv = wv->as_matrix();
  } else {
    winv = pseudo_inverse(ds.ica.weights * ds.ica.sphere);
  }
  if (winv.rows() == ds.n_chan && winv.cols() == n_comp) {
    ds.ica.winv = std::move(winv);
  } else if (winv.rows() == n_ica && winv.cols() == n_comp) {
    // scatter subset-decomposition projections into full channel space
    ds.ica.winv = Mat::Zero(ds.n_chan, n_comp);
    for (Index i = 0; i < n_ica; ++i)
      ds.ica.winv.row(ds.ica.ica_chan_indices[static_cast<std::size_t>(i)]) =
          winv.row(i);
  } else {
    throw error("ShapeMismatch", "icawinv extents do not match the decomposition");
  }
  return ds;
}

Tensor3 ica_activations(const EegDataset& ds) {
  Index n_ica = static_cast<Index>(ds.ica.ica_chan_indices.size());
  if (ds.ica.weights.cols() != ds.ica.sphere.rows() ||
      ds.ica.sphere.cols() != n_ica)
    throw error("ShapeMismatch", "ICA matrices inconsistent with channel subset");
  Mat unmix = ds.ica.weights * ds.ica.sphere;  // n_comp x n_ica
  Tensor3 act(unmix.rows(), ds.pnts, ds.trials);
  Mat sel(n_ica, ds.pnts);
  for (Index t = 0; t < ds.trials; ++t) {
    auto slab = ds.data.slab(t);
    for (Index i = 0; i < n_ica; ++i)
      sel.row(i) = slab.row(ds.ica.ica_chan_indices[static_cast<std::size_t>(i)]);
    act.slab(t) = unmix * sel;
  }
  return act;
}

}  // namespace iclabel::dataset
