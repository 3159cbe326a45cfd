#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace iclabel {

using Scalar = double;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

// Error with a stable machine-readable kind string, e.g. "Truncated",
// "ShapeMismatch". Kinds are part of each module's contract.
class error : public std::runtime_error {
public:
  error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

// Dense rank-3 array, column-major (d0 fastest), matching MAT-file layout.
class Tensor3 {
public:
  Tensor3() : d0_(0), d1_(0), d2_(0) {}
  Tensor3(Index d0, Index d1, Index d2)
      : d0_(d0), d1_(d1), d2_(d2), data_(Vec::Zero(d0 * d1 * d2)) {}

  Index dim0() const { return d0_; }
  Index dim1() const { return d1_; }
  Index dim2() const { return d2_; }
  Index size() const { return data_.size(); }

  Scalar& operator()(Index i, Index j, Index k) {
    return data_[i + d0_ * (j + d1_ * k)];
  }
  Scalar operator()(Index i, Index j, Index k) const {
    return data_[i + d0_ * (j + d1_ * k)];
  }

  // d0 x d1 matrix view of slab k.
  Eigen::Map<Mat> slab(Index k) {
    return Eigen::Map<Mat>(data_.data() + d0_ * d1_ * k, d0_, d1_);
  }
  Eigen::Map<const Mat> slab(Index k) const {
    return Eigen::Map<const Mat>(data_.data() + d0_ * d1_ * k, d0_, d1_);
  }

  Vec& flat() { return data_; }
  const Vec& flat() const { return data_; }

private:
  Index d0_, d1_, d2_;
  Vec data_;
};

}  // namespace iclabel
