#pragma once

#include <filesystem>
#include <variant>
#include <vector>

#include "lse/image.hpp"

namespace lse {

/// Axis-aligned rectangle: rows [row, row+height), cols [col, col+width).
struct Rectangle {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
  double intensity = 0.0;
};

/// Disk membership (i - center_row)^2 + (j - center_col)^2 <= radius^2 in
/// pixel-center coordinates.
struct Disk {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius = 0.0;
  double intensity = 0.0;
};

using Shape = std::variant<Rectangle, Disk>;

/// Piecewise-constant test image: shapes are drawn in list order, later
/// shapes overwrite earlier ones, and anything outside the canvas is
/// clipped silently. Intensities are expected in [0, 255].
struct PhantomSpec {
  int rows = 0;
  int cols = 0;
  double background = 0.0;
  std::vector<Shape> shapes;
};

Image render_phantom(const PhantomSpec& spec);

/// 32x32 canvas with a 12x20 rectangle at intensity 120 and a radius-6
/// disk at intensity 90 on background 65, so gamma = 70 separates the
/// rectangle-plus-disk set from the background and the truth stays inside
/// the default box [gamma-5, 255].
PhantomSpec default_phantom();

/// Read a PhantomSpec from its JSON form, e.g.
/// {"rows":32,"cols":32,"background":40,"shapes":[
///   {"kind":"rectangle","row":3,"col":5,"height":12,"width":20,"intensity":120},
///   {"kind":"disk","center_row":21,"center_col":15,"radius":6,"intensity":90}]}
PhantomSpec load_phantom_spec(const std::filesystem::path& path);
PhantomSpec phantom_spec_from_json(const std::string& text);
std::string phantom_spec_to_json(const PhantomSpec& spec);

/// Load an 8-bit PGM image (P2 or P5, maxval 255). Parse errors report the
/// byte offset of the offending token.
Image load_image(const std::filesystem::path& path);

/// Write a binary P5 PGM with maxval 255; pixels are rounded half-up and
/// clamped to [0, 255].
void save_image(const Image& img, const std::filesystem::path& path);

/// Write a mask as a P5 PGM: members 255, non-members 0.
void save_mask(const LevelSetMask& mask, const std::filesystem::path& path);

}  // namespace lse
