#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace lse {

/// Real-valued m-by-n pixel grid stored as a row-major scan of length
/// rows*cols. Pixel intensities are nominally in [0,255] for 8-bit inputs
/// but unconstrained as a type. Immutable after construction.
class Image {
 public:
  Image() = default;
  Image(int rows, int cols, Eigen::VectorXd pixels);
  Image(int rows, int cols, double fill);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Eigen::Index size() const { return pixels_.size(); }
  const Eigen::VectorXd& pixels() const { return pixels_; }

  double operator()(int i, int j) const {
    return pixels_[static_cast<Eigen::Index>(i) * cols_ + j];
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Eigen::VectorXd pixels_;
};

/// Boolean set membership on an m-by-n grid, row-major like Image.
class LevelSetMask {
 public:
  LevelSetMask() = default;
  LevelSetMask(int rows, int cols, std::vector<std::uint8_t> members);
  LevelSetMask(int rows, int cols, bool fill = false);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<std::uint8_t>& members() const { return members_; }

  bool contains(std::size_t flat_index) const {
    return members_[flat_index] != 0;
  }
  bool operator()(int i, int j) const {
    return members_[static_cast<std::size_t>(i) * cols_ + j] != 0;
  }

  /// Number of member pixels.
  std::size_t count() const;

  bool operator==(const LevelSetMask& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> members_;
};

/// Level threshold gamma together with the box bounds [lower, upper]
/// used by the constrained solve. Requires lower < upper and
/// lower <= gamma <= upper.
struct LevelSpec {
  double gamma = 0.0;
  double lower = 0.0;
  double upper = 255.0;

  LevelSpec() = default;
  LevelSpec(double gamma, double lower, double upper);
};

/// Reinterpret a length-p vector as an m-by-n row-major image.
/// Exact inverse of Image::pixels(). Throws std::invalid_argument on a
/// dimension mismatch.
Image reshape_to_image(const Eigen::VectorXd& v, int rows, int cols);

/// Membership mask of {j : pixels[j] >= gamma}. The comparison is
/// inclusive.
LevelSetMask extract_level_set(const Image& img, double gamma);

/// Elementwise XOR of two masks of matching dimensions.
LevelSetMask symmetric_difference(const LevelSetMask& a, const LevelSetMask& b);

}  // namespace lse
