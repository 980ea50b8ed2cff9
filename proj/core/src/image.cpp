#include "lse/image.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lse {

namespace {

void check_shape(int rows, int cols, std::size_t length, const char* what) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument(std::string(what) +
                                ": rows and cols must be positive");
  }
  const auto expected =
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (length != expected) {
    throw std::invalid_argument(std::string(what) + ": buffer length " +
                                std::to_string(length) + " does not match " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

}  // namespace

Image::Image(int rows, int cols, Eigen::VectorXd pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  check_shape(rows, cols, static_cast<std::size_t>(pixels_.size()), "Image");
}

Image::Image(int rows, int cols, double fill)
    : Image(rows, cols,
            Eigen::VectorXd::Constant(
                static_cast<Eigen::Index>(rows) * cols, fill)) {}

LevelSetMask::LevelSetMask(int rows, int cols,
                           std::vector<std::uint8_t> members)
    : rows_(rows), cols_(cols), members_(std::move(members)) {
  check_shape(rows, cols, members_.size(), "LevelSetMask");
}

LevelSetMask::LevelSetMask(int rows, int cols, bool fill)
    : LevelSetMask(rows, cols,
                   std::vector<std::uint8_t>(
                       static_cast<std::size_t>(rows) * cols, fill ? 1 : 0)) {}

std::size_t LevelSetMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(members_.begin(), members_.end(),
                    [](std::uint8_t m) { return m != 0; }));
}

LevelSpec::LevelSpec(double gamma, double lower, double upper)
    : gamma(gamma), lower(lower), upper(upper) {
  if (!(lower < upper)) {
    throw std::invalid_argument("LevelSpec: requires lower < upper");
  }
  if (gamma < lower || gamma > upper) {
    throw std::invalid_argument("LevelSpec: requires lower <= gamma <= upper");
  }
}

Image reshape_to_image(const Eigen::VectorXd& v, int rows, int cols) {
  return Image(rows, cols, v);
}

LevelSetMask extract_level_set(const Image& img, double gamma) {
  std::vector<std::uint8_t> members(static_cast<std::size_t>(img.size()));
  const auto& px = img.pixels();
  for (Eigen::Index i = 0; i < px.size(); ++i) {
    members[static_cast<std::size_t>(i)] = px[i] >= gamma ? 1 : 0;
  }
  return LevelSetMask(img.rows(), img.cols(), std::move(members));
}

LevelSetMask symmetric_difference(const LevelSetMask& a,
                                  const LevelSetMask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(
        "symmetric_difference: mask dimensions differ");
  }
  std::vector<std::uint8_t> members(a.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    members[i] = (a.members()[i] != 0) != (b.members()[i] != 0) ? 1 : 0;
  }
  return LevelSetMask(a.rows(), a.cols(), std::move(members));
}

}  // namespace lse
