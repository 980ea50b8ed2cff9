#include "lse/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lse {

namespace {

void paint(const Rectangle& r, int rows, int cols, Eigen::VectorXd& px) {
  const int i0 = std::max(r.row, 0);
  const int i1 = std::min(r.row + r.height, rows);
  const int j0 = std::max(r.col, 0);
  const int j1 = std::min(r.col + r.width, cols);
  for (int i = i0; i < i1; ++i) {
    for (int j = j0; j < j1; ++j) {
      px[static_cast<Eigen::Index>(i) * cols + j] = r.intensity;
    }
  }
}

void paint(const Disk& d, int rows, int cols, Eigen::VectorXd& px) {
  const double r2 = d.radius * d.radius;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double di = i - d.center_row;
      const double dj = j - d.center_col;
      if (di * di + dj * dj <= r2) {
        px[static_cast<Eigen::Index>(i) * cols + j] = d.intensity;
      }
    }
  }
}

}  // namespace

namespace {

bool valid_intensity(double v) { return v >= 0.0 && v <= 255.0; }

}  // namespace

Image render_phantom(const PhantomSpec& spec) {
  if (spec.rows <= 0 || spec.cols <= 0) {
    throw std::invalid_argument("render_phantom: canvas must be nonempty");
  }
  if (!valid_intensity(spec.background)) {
    throw std::invalid_argument("render_phantom: background outside [0, 255]");
  }
  for (const Shape& shape : spec.shapes) {
    const double intensity =
        std::visit([](const auto& s) { return s.intensity; }, shape);
    if (!valid_intensity(intensity)) {
      throw std::invalid_argument(
          "render_phantom: shape intensity outside [0, 255]");
    }
  }
  Eigen::VectorXd px = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(spec.rows) * spec.cols, spec.background);
  for (const Shape& shape : spec.shapes) {
    std::visit([&](const auto& s) { paint(s, spec.rows, spec.cols, px); },
               shape);
  }
  return Image(spec.rows, spec.cols, std::move(px));
}

PhantomSpec default_phantom() {
  PhantomSpec spec;
  spec.rows = 32;
  spec.cols = 32;
  spec.background = 65.0;
  spec.shapes.push_back(Rectangle{3, 5, 12, 20, 120.0});
  spec.shapes.push_back(Disk{21.0, 15.0, 6.0, 90.0});
  return spec;
}

namespace {

using nlohmann::json;

json shape_to_json(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return json{{"kind", "rectangle"}, {"row", s.row},
                      {"col", s.col},        {"height", s.height},
                      {"width", s.width},    {"intensity", s.intensity}};
        } else {
          return json{{"kind", "disk"},
                      {"center_row", s.center_row},
                      {"center_col", s.center_col},
                      {"radius", s.radius},
                      {"intensity", s.intensity}};
        }
      },
      shape);
}

Shape shape_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "rectangle") {
    return Rectangle{j.at("row").get<int>(), j.at("col").get<int>(),
                     j.at("height").get<int>(), j.at("width").get<int>(),
                     j.at("intensity").get<double>()};
  }
  if (kind == "disk") {
    return Disk{j.at("center_row").get<double>(),
                j.at("center_col").get<double>(),
                j.at("radius").get<double>(), j.at("intensity").get<double>()};
  }
  throw std::runtime_error("phantom spec: unknown shape kind '" + kind + "'");
}

}  // namespace

std::string phantom_spec_to_json(const PhantomSpec& spec) {
  json j{{"rows", spec.rows},
         {"cols", spec.cols},
         {"background", spec.background},
         {"shapes", json::array()}};
  for (const Shape& shape : spec.shapes) {
    j["shapes"].push_back(shape_to_json(shape));
  }
  return j.dump(2);
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
  const json j = json::parse(text);
  PhantomSpec spec;
  spec.rows = j.at("rows").get<int>();
  spec.cols = j.at("cols").get<int>();
  spec.background = j.at("background").get<double>();
  if (j.contains("shapes")) {
    for (const json& js : j.at("shapes")) {
      spec.shapes.push_back(shape_from_json(js));
    }
  }
  return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_phantom_spec: cannot open " +
                             path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return phantom_spec_from_json(buffer.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("load_phantom_spec: " + path.string() + ": " +
                             e.what());
  }
}

namespace {

// Whole-file PGM scanner that tracks the byte offset for error messages.
class PgmScanner {
 public:
  PgmScanner(std::string data, std::string name)
      : data_(std::move(data)), name_(std::move(name)) {}

  [[noreturn]] void fail(const std::string& message, std::size_t at) const {
    throw std::runtime_error(name_ + ": " + message + " at byte " +
                             std::to_string(at));
  }

  void skip_separators() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long parse_uint(const char* what) {
    skip_separators();
    token_start_ = pos_;
    const std::size_t start = pos_;
    if (pos_ >= data_.size()) {
      fail(std::string("missing ") + what, pos_);
    }
    long value = 0;
    bool any = false;
    while (pos_ < data_.size() &&
           std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 1'000'000'000L) {
        fail(std::string(what) + " out of range", start);
      }
      ++pos_;
      any = true;
    }
    if (!any) {
      fail(std::string("expected ") + what, start);
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  std::size_t last_token_start() const { return token_start_; }
  const std::string& data() const { return data_; }

  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
  std::size_t token_start_ = 0;
};

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_image: cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  PgmScanner scan(buffer.str(), path.string());

  if (scan.data().size() < 2 ||
      (scan.data().compare(0, 2, "P2") != 0 &&
       scan.data().compare(0, 2, "P5") != 0)) {
    scan.fail("not a P2/P5 PGM (bad magic)", 0);
  }
  const bool binary = scan.data()[1] == '5';
  scan.advance(2);

  const long cols = scan.parse_uint("width");
  if (cols <= 0) scan.fail("width must be positive", scan.last_token_start());
  const long rows = scan.parse_uint("height");
  if (rows <= 0) scan.fail("height must be positive", scan.last_token_start());
  const long maxval = scan.parse_uint("maxval");
  if (maxval != 255) {
    scan.fail("unsupported maxval " + std::to_string(maxval) +
                  " (expected 255)",
              scan.last_token_start());
  }

  const std::size_t count =
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  Eigen::VectorXd px(static_cast<Eigen::Index>(count));

  if (binary) {
    // exactly one separator byte between the header and the payload
    if (scan.pos() >= scan.data().size() ||
        !std::isspace(static_cast<unsigned char>(scan.data()[scan.pos()]))) {
      scan.fail("expected single whitespace before P5 payload", scan.pos());
    }
    scan.advance(1);
    if (scan.data().size() - scan.pos() < count) {
      scan.fail("P5 payload truncated (need " + std::to_string(count) +
                    " bytes, have " +
                    std::to_string(scan.data().size() - scan.pos()) + ")",
                scan.pos());
    }
    for (std::size_t i = 0; i < count; ++i) {
      px[static_cast<Eigen::Index>(i)] = static_cast<double>(
          static_cast<unsigned char>(scan.data()[scan.pos() + i]));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = scan.parse_uint("pixel value");
      if (v > maxval) {
        scan.fail("pixel value " + std::to_string(v) + " exceeds maxval",
                  scan.pos());
      }
      px[static_cast<Eigen::Index>(i)] = static_cast<double>(v);
    }
  }
  return Image(static_cast<int>(rows), static_cast<int>(cols), std::move(px));
}

namespace {

void write_pgm(const std::filesystem::path& path, int rows, int cols,
               const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save: cannot open " + path.string());
  }
  out << "P5\n" << cols << " " << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("save: write failed for " + path.string());
  }
}

}  // namespace

void save_image(const Image& img, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.size()));
  const auto& px = img.pixels();
  for (Eigen::Index i = 0; i < px.size(); ++i) {
    const double rounded = std::floor(px[i] + 0.5);  // half-up
    bytes[static_cast<std::size_t>(i)] =
        static_cast<unsigned char>(std::clamp(rounded, 0.0, 255.0));
  }
  write_pgm(path, img.rows(), img.cols(), bytes);
}

void save_mask(const LevelSetMask& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    bytes[i] = mask.contains(i) ? 255 : 0;
  }
  write_pgm(path, mask.rows(), mask.cols(), bytes);
}

}  // namespace lse
