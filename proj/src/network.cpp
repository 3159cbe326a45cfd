#include "iclabel/network.hpp"

#include <cmath>

namespace iclabel::network {

namespace {

ConvSpec spec(std::string name, Index in, Index out, Index kh, Index kw,
              Index stride, Index ph, Index pw, bool lrelu) {
  return ConvSpec{std::move(name), in, out, kh, kw, stride, ph, pw, lrelu};
}

Index conv_out_extent(Index in, Index pad, Index kernel, Index stride) {
  return (in + 2 * pad - kernel) / stride + 1;
}

void leaky_relu_inplace(Planes& planes) {
  for (Mat& p : planes)
    p = p.unaryExpr([](double x) { return x >= 0.0 ? x : kLeakySlope * x; });
}

Mat mirror_lr(const Mat& m) { return m.rowwise().reverse(); }

}  // namespace

const std::vector<ConvSpec>& architecture() {
  static const std::vector<ConvSpec> arch = {
      spec("Topo_1", 1, 128, 4, 4, 2, 1, 1, true),
      spec("Topo_2", 128, 256, 4, 4, 2, 1, 1, true),
      spec("Topo_3", 256, 512, 4, 4, 2, 1, 1, true),
      spec("PSD_1", 1, 128, 1, 3, 1, 0, 1, true),
      spec("PSD_2", 128, 256, 1, 3, 1, 0, 1, true),
      spec("PSD_3", 256, 1, 1, 3, 1, 0, 1, true),
      spec("ACF_1", 1, 128, 1, 3, 1, 0, 1, true),
      spec("ACF_2", 128, 256, 1, 3, 1, 0, 1, true),
      spec("ACF_3", 256, 1, 1, 3, 1, 0, 1, true),
      spec("Discr", 712, kNumClasses, 4, 4, 1, 0, 0, false),
  };
  // shape chain sanity: 32 -> 16 -> 8 -> 4, concat 512+100+100 = 712 -> 1
  static const bool checked = [] {
    Index e = 32;
    for (int i = 0; i < 3; ++i) e = conv_out_extent(e, 1, 4, 2);
    if (e != 4) throw error("ShapeMismatch", "topo branch shape chain broken");
    if (conv_out_extent(4, 0, 4, 1) != 1)
      throw error("ShapeMismatch", "discriminator shape chain broken");
    if (512 + 100 + 100 != 712)
      throw error("ShapeMismatch", "concat channel count broken");
    return true;
  }();
  (void)checked;
  return arch;
}

const ConvLayer& NetworkWeights::layer(const std::string& name) const {
  for (const ConvLayer& l : layers)
    if (l.spec.name == name) return l;
  throw error("MissingLayer", "no layer '" + name + "'");
}

Planes conv_forward(const ConvLayer& layer, const Planes& input) {
  const ConvSpec& s = layer.spec;
  if (static_cast<Index>(input.size()) != s.in_channels)
    throw error("ShapeMismatch", "layer " + s.name + ": expected " +
                                     std::to_string(s.in_channels) +
                                     " input channels, got " +
                                     std::to_string(input.size()));
  Index in_h = input[0].rows();
  Index in_w = input[0].cols();
  Index out_h = conv_out_extent(in_h, s.pad_h, s.kernel_h, s.stride);
  Index out_w = conv_out_extent(in_w, s.pad_w, s.kernel_w, s.stride);
  if (out_h < 1 || out_w < 1)
    throw error("ShapeMismatch", "layer " + s.name + ": empty output extent");

  Planes out(static_cast<std::size_t>(s.out_channels));
  for (Index oc = 0; oc < s.out_channels; ++oc) {
    Mat plane = Mat::Constant(out_h, out_w, layer.bias[oc]);
    for (Index ic = 0; ic < s.in_channels; ++ic) {
      const Mat& in = input[static_cast<std::size_t>(ic)];
      const Mat& k =
          layer.kernels[static_cast<std::size_t>(oc * s.in_channels + ic)];
      for (Index oy = 0; oy < out_h; ++oy) {
        Index y0 = oy * s.stride - s.pad_h;
        for (Index ox = 0; ox < out_w; ++ox) {
          Index x0 = ox * s.stride - s.pad_w;
          double acc = 0.0;
          Index ky_lo = std::max<Index>(0, -y0);
          Index ky_hi = std::min<Index>(s.kernel_h, in_h - y0);
          Index kx_lo = std::max<Index>(0, -x0);
          Index kx_hi = std::min<Index>(s.kernel_w, in_w - x0);
          for (Index ky = ky_lo; ky < ky_hi; ++ky)
            for (Index kx = kx_lo; kx < kx_hi; ++kx)
              acc += k(ky, kx) * in(y0 + ky, x0 + kx);
          plane(oy, ox) += acc;
        }
      }
    }
    out[static_cast<std::size_t>(oc)] = std::move(plane);
  }
  if (s.followed_by_lrelu) leaky_relu_inplace(out);
  return out;
}

NetworkWeights load_weights(const matreader::MatFile& file) {
  NetworkWeights w;
  for (const ConvSpec& s : architecture()) {
    std::string wname = s.name + "_weight";
    std::string bname = s.name + "_bias";
    if (!file.has(wname)) throw error("MissingLayer", "missing '" + wname + "'");
    if (!file.has(bname)) throw error("MissingLayer", "missing '" + bname + "'");

    const matreader::NumericArray& kn = file.var(wname).numeric();
    std::vector<std::size_t> dims = kn.dims;
    while (dims.size() < 4) dims.push_back(1);
    auto want = std::vector<std::size_t>{
        static_cast<std::size_t>(s.out_channels),
        static_cast<std::size_t>(s.in_channels),
        static_cast<std::size_t>(s.kernel_h),
        static_cast<std::size_t>(s.kernel_w)};
    if (dims != want)
      throw error("ShapeMismatch",
                  "'" + wname + "': expected (" + std::to_string(want[0]) + "," +
                      std::to_string(want[1]) + "," + std::to_string(want[2]) +
                      "," + std::to_string(want[3]) + "), found an array of " +
                      std::to_string(kn.data.size()) + " elements");

    ConvLayer layer;
    layer.spec = s;
    layer.kernels.resize(
        static_cast<std::size_t>(s.out_channels * s.in_channels));
    // column-major dims (out, in, kh, kw)
    auto at = [&](Index oc, Index ic, Index ky, Index kx) {
      std::size_t idx = static_cast<std::size_t>(
          oc + s.out_channels * (ic + s.in_channels * (ky + s.kernel_h * kx)));
      return kn.data[idx];
    };
    for (Index oc = 0; oc < s.out_channels; ++oc)
      for (Index ic = 0; ic < s.in_channels; ++ic) {
        Mat k(s.kernel_h, s.kernel_w);
        for (Index ky = 0; ky < s.kernel_h; ++ky)
          for (Index kx = 0; kx < s.kernel_w; ++kx) k(ky, kx) = at(oc, ic, ky, kx);
        if (!k.allFinite())
          throw error("NonFinite", "'" + wname + "' holds non-finite values");
        layer.kernels[static_cast<std::size_t>(oc * s.in_channels + ic)] =
            std::move(k);
      }

    Vec bias = file.var(bname).as_vector();
    if (bias.size() != s.out_channels)
      throw error("ShapeMismatch", "'" + bname + "': expected " +
                                       std::to_string(s.out_channels) +
                                       " values, found " +
                                       std::to_string(bias.size()));
    if (!bias.allFinite())
      throw error("NonFinite", "'" + bname + "' holds non-finite values");
    layer.bias = std::move(bias);
    w.layers.push_back(std::move(layer));
  }
  return w;
}

namespace {

// Branch output of PSD/ACF (1 channel x 1 x 100) reshaped to 100 channels of
// 1x1, tiled to 4x4 constants.
Planes tile_vector_channels(const Mat& row) {
  Planes out(static_cast<std::size_t>(row.cols()));
  for (Index i = 0; i < row.cols(); ++i)
    out[static_cast<std::size_t>(i)] = Mat::Constant(4, 4, row(0, i));
  return out;
}

Vec forward_one(const NetworkWeights& w, const Mat& topo, const Vec& psd,
                const Vec& acf) {
  Planes t{topo};
  t = conv_forward(w.layer("Topo_1"), t);
  t = conv_forward(w.layer("Topo_2"), t);
  t = conv_forward(w.layer("Topo_3"), t);

  Planes p{psd.transpose()};
  p = conv_forward(w.layer("PSD_1"), p);
  p = conv_forward(w.layer("PSD_2"), p);
  p = conv_forward(w.layer("PSD_3"), p);

  Planes a{acf.transpose()};
  a = conv_forward(w.layer("ACF_1"), a);
  a = conv_forward(w.layer("ACF_2"), a);
  a = conv_forward(w.layer("ACF_3"), a);

  // concat order: Topo-3 channels, then PSD, then ACF
  Planes cat;
  cat.reserve(712);
  for (Mat& m : t) cat.push_back(std::move(m));
  for (Mat& m : tile_vector_channels(p[0])) cat.push_back(std::move(m));
  for (Mat& m : tile_vector_channels(a[0])) cat.push_back(std::move(m));

  Planes logits = conv_forward(w.layer("Discr"), cat);
  Vec out(kNumClasses);
  for (int c = 0; c < kNumClasses; ++c)
    out[c] = logits[static_cast<std::size_t>(c)](0, 0);
  return out;
}

void check_batch(const FeatureBatch& b) {
  if (b.psd.size() != b.topo.size() || b.acf.size() != b.topo.size())
    throw error("ShapeMismatch", "feature batch extents disagree");
  for (Index i = 0; i < b.size(); ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    if (b.topo[si].rows() != 32 || b.topo[si].cols() != 32 ||
        b.psd[si].size() != 100 || b.acf[si].size() != 100)
      throw error("ShapeMismatch",
                  "feature extents wrong for component " + std::to_string(i));
    if (!b.topo[si].allFinite() || !b.psd[si].allFinite() ||
        !b.acf[si].allFinite())
      throw error("NonFinite",
                  "non-finite feature for component " + std::to_string(i));
  }
}

}  // namespace

Mat forward(const NetworkWeights& w, const FeatureBatch& b) {
  check_batch(b);
  Mat logits(b.size(), kNumClasses);
  for (Index i = 0; i < b.size(); ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    logits.row(i) = forward_one(w, b.topo[si], b.psd[si], b.acf[si]).transpose();
  }
  return logits;
}

Probabilities softmax7(const Mat& logits) {
  if (!logits.allFinite()) throw error("NonFinite", "non-finite logits");
  Probabilities p;
  p.table.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    p.table.row(i) = e / e.sum();
  }
  return p;
}

Probabilities infer_augmented(const NetworkWeights& w, const FeatureBatch& b) {
  check_batch(b);
  Probabilities acc;
  acc.table = Mat::Zero(b.size(), kNumClasses);
  for (int variant = 0; variant < 4; ++variant) {
    FeatureBatch v;
    v.psd = b.psd;
    v.acf = b.acf;
    v.topo.reserve(b.topo.size());
    for (const Mat& m : b.topo) {
      Mat t = (variant % 2 == 1) ? mirror_lr(m) : m;
      if (variant >= 2) t = -t;
      v.topo.push_back(std::move(t));
    }
    acc.table += softmax7(forward(w, v)).table;
  }
  acc.table /= 4.0;
  for (Index i = 0; i < acc.table.rows(); ++i)
    acc.table.row(i) /= acc.table.row(i).sum();
  return acc;
}

}  // namespace iclabel::network
