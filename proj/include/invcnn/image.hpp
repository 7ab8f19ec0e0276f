#ifndef INVCNN_IMAGE_HPP
#define INVCNN_IMAGE_HPP

// Grayscale image plumbing: binary PGM I/O, bicubic resampling, PSNR, crops
// and a few synthetic image generators for desk-scale experiments.

#include "invcnn/common.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace invcnn {

namespace detail {

inline int read_pgm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
    c = in.peek();
  }
  if (c == EOF || !std::isdigit(c)) throw FormatError("pgm: malformed header");
  long v = 0;
  while (std::isdigit(in.peek())) {
    v = v * 10 + (in.get() - '0');
    if (v > 1 << 20) throw FormatError("pgm: header value out of range");
  }
  return static_cast<int>(v);
}

}  // namespace detail

/// Binary P5 with maxval 255; intensities scaled to [0, 1].
inline GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("pgm: cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw FormatError("pgm: not a binary P5 file: " + path.string());
  const int width = detail::read_pgm_int(in);
  const int height = detail::read_pgm_int(in);
  const int maxval = detail::read_pgm_int(in);
  if (width < 1 || height < 1) throw FormatError("pgm: empty image");
  if (maxval != 255) throw FormatError("pgm: only maxval 255 is supported");
  if (!std::isspace(in.get())) throw FormatError("pgm: missing separator after header");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw FormatError("pgm: truncated pixel data");
  GrayImage img(height, width);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j)
      img(i, j) = static_cast<double>(bytes[static_cast<std::size_t>(i) * width + j]) / 255.0;
  return img;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  if (img.size() == 0) throw FormatError("pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("pgm: cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.size()));
  for (Index i = 0; i < img.rows(); ++i)
    for (Index j = 0; j < img.cols(); ++j) {
      const double v = std::floor(std::clamp(img(i, j), 0.0, 1.0) * 255.0 + 0.5);
      bytes[static_cast<std::size_t>(i * img.cols() + j)] = static_cast<unsigned char>(v);
    }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Catmull-Rom cubic convolution kernel (a = -0.5).
inline double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace detail {

struct Taps {
  std::vector<Index> index;
  std::vector<double> weight;
};

/// Resampling weights for one axis with pixel-centre alignment and edge
/// clamping. Downscaling stretches the kernel so it also low-passes.
inline std::vector<Taps> axis_taps(Index in_len, Index out_len, double scale) {
  const double stretch = scale < 1.0 ? 1.0 / scale : 1.0;
  const double support = 2.0 * stretch;
  std::vector<Taps> taps(static_cast<std::size_t>(out_len));
  for (Index o = 0; o < out_len; ++o) {
    const double centre = (static_cast<double>(o) + 0.5) / scale - 0.5;
    const auto lo = static_cast<Index>(std::floor(centre - support)) + 1;
    const auto hi = static_cast<Index>(std::floor(centre + support));
    Taps& t = taps[static_cast<std::size_t>(o)];
    double total = 0.0;
    for (Index k = lo; k <= hi; ++k) {
      const double w = cubic_kernel((centre - static_cast<double>(k)) / stretch);
      if (w == 0.0) continue;
      t.index.push_back(std::clamp<Index>(k, 0, in_len - 1));
      t.weight.push_back(w);
      total += w;
    }
    for (double& w : t.weight) w /= total;
  }
  return taps;
}

}  // namespace detail

/// Separable bicubic resize to floor(dim * scale) in each direction.
inline GrayImage bicubic_resize(const GrayImage& img, double scale) {
  if (!(scale > 0.0)) throw ArgumentError("bicubic_resize: scale must be positive");
  const auto out_r = static_cast<Index>(std::floor(static_cast<double>(img.rows()) * scale + 1e-9));
  const auto out_c = static_cast<Index>(std::floor(static_cast<double>(img.cols()) * scale + 1e-9));
  if (out_r < 1 || out_c < 1) throw DimensionError("bicubic_resize: degenerate output size");
  const auto row_taps = detail::axis_taps(img.rows(), out_r, scale);
  const auto col_taps = detail::axis_taps(img.cols(), out_c, scale);
  Matrix tmp(img.rows(), out_c);
  for (Index j = 0; j < out_c; ++j) {
    const auto& t = col_taps[static_cast<std::size_t>(j)];
    for (Index i = 0; i < img.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * img(i, t.index[k]);
      tmp(i, j) = acc;
    }
  }
  GrayImage out(out_r, out_c);
  for (Index i = 0; i < out_r; ++i) {
    const auto& t = row_taps[static_cast<std::size_t>(i)];
    for (Index j = 0; j < out_c; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * tmp(t.index[k], j);
      out(i, j) = acc;
    }
  }
  return out;
}

inline GrayImage center_crop(const GrayImage& img, Index rows, Index cols) {
  if (rows > img.rows() || cols > img.cols() || rows < 1 || cols < 1)
    throw DimensionError("center_crop: crop larger than image");
  return img.block((img.rows() - rows) / 2, (img.cols() - cols) / 2, rows, cols);
}

/// 10 log10(1 / mse) with unit peak; +inf for identical inputs.
inline double psnr(const GrayImage& a, const GrayImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("psnr: shape mismatch");
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

enum class SyntheticKind { edges, texture };

/// `edges`: stripes of constant intensity separated by straight, softened
/// edges that share one orientation, plus faint noise. `texture`: i.i.d.
/// uniform noise.
inline GrayImage synthetic_image(SyntheticKind kind, Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GrayImage img(size, size);
  if (kind == SyntheticKind::texture) {
    for (Index i = 0; i < img.size(); ++i) img.data()[i] = 0.15 + 0.7 * unit(rng);
    return img;
  }
  const double pi = std::acos(-1.0);
  const double theta = pi * unit(rng);
  const double nx = std::cos(theta), ny = std::sin(theta);
  const int cuts = 4 + static_cast<int>(unit(rng) * 7.0);
  std::vector<double> offsets, widths, levels{0.2 + 0.6 * unit(rng)};
  for (int k = 0; k < cuts; ++k) {
    offsets.push_back((unit(rng) - 0.5) * static_cast<double>(size));
    widths.push_back(0.3 + 1.2 * unit(rng));
    levels.push_back(0.1 + 0.8 * unit(rng));
  }
  std::sort(offsets.begin(), offsets.end());
  std::normal_distribution<double> grain(0.0, 0.01);
  for (Index i = 0; i < size; ++i)
    for (Index j = 0; j < size; ++j) {
      const double d = (static_cast<double>(j) - size / 2.0) * nx + (static_cast<double>(i) - size / 2.0) * ny;
      double v = levels[0];
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const double step = 0.5 * (1.0 + std::tanh((d - offsets[k]) / widths[k]));
        v += step * (levels[k + 1] - levels[k]);
      }
      img(i, j) = std::clamp(v + grain(rng), 0.0, 1.0);
    }
  return img;
}

}  // namespace invcnn

#endif  // INVCNN_IMAGE_HPP
