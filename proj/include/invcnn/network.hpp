#ifndef INVCNN_NETWORK_HPP
#define INVCNN_NETWORK_HPP

// A small single-channel superresolution CNN: valid 2-D correlations, the
// nonnegative soft threshold max(z - b, 0) as activation, a linear last layer,
// and optional skip paths. Trained by plain per-patch SGD on the mse.
//
// Skip topologies
//   none             : plain cascade
//   global_residual  : output += centre crop of the input image
//   symmetric_skips  : global residual, plus activation i is added to the
//                      input of layer (depth - i) whenever that layer does not
//                      already consume it (1 <= i < depth - i - 1)
// Every addition centre-crops the earlier, larger map to the later size.

#include "invcnn/common.hpp"
#include "invcnn/image.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace invcnn {

enum class SkipMode { none, global_residual, symmetric_skips };

inline const char* to_string(SkipMode m) {
  switch (m) {
    case SkipMode::none: return "none";
    case SkipMode::global_residual: return "global_residual";
    case SkipMode::symmetric_skips: return "symmetric_skips";
  }
  return "none";
}

inline SkipMode skip_mode_from_string(const std::string& s) {
  if (s == "none") return SkipMode::none;
  if (s == "global_residual") return SkipMode::global_residual;
  if (s == "symmetric_skips") return SkipMode::symmetric_skips;
  throw ArgumentError("unknown skip mode: " + s);
}

struct NetworkConfig {
  int depth = 10;
  int width = 8;
  int kernel = 3;
  SkipMode skip_mode = SkipMode::none;
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  int epochs = 10;
  /// Multiplies the He standard deviation sqrt(2 / fan_in) of the Gaussian init.
  double init_scale = 1.0;

  void validate() const {
    if (depth < 2) throw ArgumentError("NetworkConfig: depth must be >= 2");
    if (width < 1) throw ArgumentError("NetworkConfig: width must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw ArgumentError("NetworkConfig: kernel must be odd");
    if (!(learning_rate > 0.0)) throw ArgumentError("NetworkConfig: learning_rate must be positive");
    if (epochs < 0) throw ArgumentError("NetworkConfig: epochs must be >= 0");
  }
};

/// Multi-channel map: one column per channel, pixels row-major within it.
struct FeatureMap {
  Index height = 0;
  Index width = 0;
  Matrix data;

  Index channels() const { return data.cols(); }

  static FeatureMap from_image(const GrayImage& img) {
    FeatureMap m{img.rows(), img.cols(), Matrix(img.size(), 1)};
    for (Index i = 0; i < img.rows(); ++i)
      for (Index j = 0; j < img.cols(); ++j) m.data(i * img.cols() + j, 0) = img(i, j);
    return m;
  }

  GrayImage to_image(Index channel = 0) const {
    GrayImage img(height, width);
    for (Index i = 0; i < height; ++i)
      for (Index j = 0; j < width; ++j) img(i, j) = data(i * width + j, channel);
    return img;
  }
};

namespace detail {

inline FeatureMap crop_map(const FeatureMap& m, Index h, Index w) {
  const Index oy = (m.height - h) / 2;
  const Index ox = (m.width - w) / 2;
  FeatureMap out{h, w, Matrix(h * w, m.channels())};
  for (Index c = 0; c < m.channels(); ++c)
    for (Index i = 0; i < h; ++i) out.data.col(c).segment(i * w, w) = m.data.col(c).segment((i + oy) * m.width + ox, w);
  return out;
}

/// Adds `small` into the centre of `big`.
inline void add_centered(FeatureMap& big, const FeatureMap& small) {
  const Index oy = (big.height - small.height) / 2;
  const Index ox = (big.width - small.width) / 2;
  for (Index c = 0; c < small.channels(); ++c)
    for (Index i = 0; i < small.height; ++i)
      big.data.col(c).segment((i + oy) * big.width + ox, small.width) += small.data.col(c).segment(i * small.width, small.width);
}

/// Rows are output pixels, columns are (channel, u, v) taps.
inline Matrix im2col(const FeatureMap& x, Index k) {
  const Index oh = x.height - k + 1;
  const Index ow = x.width - k + 1;
  Matrix cols(oh * ow, x.channels() * k * k);
  for (Index c = 0; c < x.channels(); ++c)
    for (Index u = 0; u < k; ++u)
      for (Index v = 0; v < k; ++v) {
        const Index r = (c * k + u) * k + v;
        for (Index i = 0; i < oh; ++i)
          cols.col(r).segment(i * ow, ow) = x.data.col(c).segment((i + u) * x.width + v, ow);
      }
  return cols;
}

inline FeatureMap col2im(const Matrix& dcols, Index channels, Index height, Index width, Index k) {
  const Index oh = height - k + 1;
  const Index ow = width - k + 1;
  FeatureMap out{height, width, Matrix::Zero(height * width, channels)};
  for (Index c = 0; c < channels; ++c)
    for (Index u = 0; u < k; ++u)
      for (Index v = 0; v < k; ++v) {
        const Index r = (c * k + u) * k + v;
        for (Index i = 0; i < oh; ++i)
          out.data.col(c).segment((i + u) * width + v, ow) += dcols.col(r).segment(i * ow, ow);
      }
  return out;
}

}  // namespace detail

struct ConvLayer {
  Index in_channels = 0;
  Index out_channels = 0;
  Index kernel = 0;
  Matrix weights;  // out x (in * k * k); column (c * k + u) * k + v
  Vector biases;   // subtracted before the threshold
  bool thresholded = true;

  /// Filter `o` as one vector over (channel, u, v).
  Vector filter(Index o) const { return weights.row(o).transpose(); }
};

struct ForwardTrace {
  std::vector<FeatureMap> layer_inputs;  // per layer, after skip additions
  std::vector<Matrix> columns;           // im2col of each layer input
  std::vector<FeatureMap> activations;   // a_0 = input image, a_l = layer l output
  FeatureMap output;
};

struct SkipEdge {
  int source;        // activation index
  int target_layer;  // 1-based layer whose input receives it
};

class ToyCnn {
 public:
  ToyCnn() = default;

  /// Gaussian weights with He scaling, zero biases.
  static ToyCnn initialized(const NetworkConfig& cfg) {
    ToyCnn net = zeros(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    for (auto& l : net.layers_) {
      const double sd = cfg.init_scale * std::sqrt(2.0 / static_cast<double>(l.weights.cols()));
      for (Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = sd * gauss(rng);
    }
    return net;
  }

  static ToyCnn zeros(const NetworkConfig& cfg) {
    cfg.validate();
    ToyCnn net;
    net.config_ = cfg;
    for (int l = 1; l <= cfg.depth; ++l) {
      ConvLayer layer;
      layer.in_channels = l == 1 ? 1 : cfg.width;
      layer.out_channels = l == cfg.depth ? 1 : cfg.width;
      layer.kernel = cfg.kernel;
      layer.weights = Matrix::Zero(layer.out_channels, layer.in_channels * cfg.kernel * cfg.kernel);
      layer.biases = Vector::Zero(layer.out_channels);
      layer.thresholded = l != cfg.depth;
      net.layers_.push_back(std::move(layer));
    }
    return net;
  }

  const NetworkConfig& config() const { return config_; }
  std::vector<ConvLayer>& layers() { return layers_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }

  Index receptive_field() const { return static_cast<Index>(config_.depth) * (config_.kernel - 1) + 1; }
  Index output_size(Index input) const { return input - receptive_field() + 1; }

  std::vector<SkipEdge> skip_edges() const {
    std::vector<SkipEdge> edges;
    if (config_.skip_mode != SkipMode::symmetric_skips) return edges;
    for (int i = 1; config_.depth - i - 1 > i; ++i) edges.push_back({i, config_.depth - i});
    return edges;
  }

  bool has_global_residual() const { return config_.skip_mode != SkipMode::none; }

  ForwardTrace trace(const GrayImage& img) const {
    if (img.rows() < receptive_field() || img.cols() < receptive_field())
      throw DimensionError("ToyCnn: input smaller than the receptive field");
    const auto edges = skip_edges();
    ForwardTrace tr;
    tr.activations.push_back(FeatureMap::from_image(img));
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const ConvLayer& l = layers_[li];
      const int layer_no = static_cast<int>(li) + 1;
      FeatureMap in = tr.activations.back();
      for (const auto& e : edges)
        if (e.target_layer == layer_no) {
          const FeatureMap src = detail::crop_map(tr.activations[static_cast<std::size_t>(e.source)], in.height, in.width);
          in.data += src.data;
        }
      Matrix cols = detail::im2col(in, l.kernel);
      FeatureMap out{in.height - l.kernel + 1, in.width - l.kernel + 1, cols * l.weights.transpose()};
      out.data.rowwise() -= l.biases.transpose();
      if (l.thresholded) out.data = out.data.cwiseMax(0.0);
      tr.layer_inputs.push_back(std::move(in));
      tr.columns.push_back(std::move(cols));
      tr.activations.push_back(std::move(out));
    }
    tr.output = tr.activations.back();
    if (has_global_residual())
      tr.output.data += detail::crop_map(tr.activations.front(), tr.output.height, tr.output.width).data;
    return tr;
  }

  GrayImage forward(const GrayImage& img) const { return trace(img).output.to_image(); }

  /// Gradient of the loss w.r.t. all parameters, flattened like parameters(),
  /// given dLoss/dOutput.
  Vector backward(const ForwardTrace& tr, const GrayImage& d_output) const {
    const auto edges = skip_edges();
    const std::size_t depth = layers_.size();
    std::vector<FeatureMap> grad(depth + 1);
    grad[depth] = FeatureMap::from_image(d_output);
    std::vector<Matrix> d_weights(depth);
    std::vector<Vector> d_biases(depth);
    for (std::size_t li = depth; li-- > 0;) {
      const ConvLayer& l = layers_[li];
      Matrix dz = grad[li + 1].data;
      if (l.thresholded) dz = dz.cwiseProduct((tr.activations[li + 1].data.array() > 0.0).cast<double>().matrix());
      d_weights[li] = dz.transpose() * tr.columns[li];
      d_biases[li] = -dz.colwise().sum().transpose();
      if (li == 0) break;
      const FeatureMap& in = tr.layer_inputs[li];
      const FeatureMap d_in = detail::col2im(dz * l.weights, in.channels(), in.height, in.width, l.kernel);
      accumulate(grad[li], d_in);
      for (const auto& e : edges)
        if (e.target_layer == static_cast<int>(li) + 1 && e.source >= 1) {
          const FeatureMap& src = tr.activations[static_cast<std::size_t>(e.source)];
          FeatureMap padded{src.height, src.width, Matrix::Zero(src.data.rows(), src.data.cols())};
          detail::add_centered(padded, d_in);
          accumulate(grad[static_cast<std::size_t>(e.source)], padded);
        }
    }
    Vector g(parameter_count());
    Index off = 0;
    for (std::size_t li = 0; li < depth; ++li) {
      for (Index o = 0; o < d_weights[li].rows(); ++o)
        for (Index c = 0; c < d_weights[li].cols(); ++c) g[off++] = d_weights[li](o, c);
      for (Index o = 0; o < d_biases[li].size(); ++o) g[off++] = d_biases[li][o];
    }
    return g;
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.biases.size();
    return n;
  }

  /// Layer by layer: weights row-major (out, in, u, v), then biases.
  Vector parameters() const {
    Vector p(parameter_count());
    Index off = 0;
    for (const auto& l : layers_) {
      for (Index o = 0; o < l.weights.rows(); ++o)
        for (Index c = 0; c < l.weights.cols(); ++c) p[off++] = l.weights(o, c);
      for (Index o = 0; o < l.biases.size(); ++o) p[off++] = l.biases[o];
    }
    return p;
  }

  void set_parameters(const Vector& p) {
    if (p.size() != parameter_count()) throw DimensionError("ToyCnn::set_parameters: length mismatch");
    Index off = 0;
    for (auto& l : layers_) {
      for (Index o = 0; o < l.weights.rows(); ++o)
        for (Index c = 0; c < l.weights.cols(); ++c) l.weights(o, c) = p[off++];
      for (Index o = 0; o < l.biases.size(); ++o) l.biases[o] = p[off++];
    }
  }

 private:
  static void accumulate(FeatureMap& into, const FeatureMap& add) {
    if (into.data.size() == 0) {
      into = add;
    } else {
      into.data += add.data;
    }
  }

  NetworkConfig config_;
  std::vector<ConvLayer> layers_;
};

/// 1/2 mean squared error over the output pixels.
inline double patch_loss(const GrayImage& out, const GrayImage& target) {
  if (out.rows() != target.rows() || out.cols() != target.cols()) throw DimensionError("patch_loss: shape mismatch");
  return 0.5 * (out - target).squaredNorm() / static_cast<double>(out.size());
}

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

inline LossAndGradient loss_and_gradient(const ToyCnn& net, const GrayImage& input, const GrayImage& target) {
  const ForwardTrace tr = net.trace(input);
  const GrayImage out = tr.output.to_image();
  const double loss = patch_loss(out, target);
  const GrayImage d_out = (out - target) / static_cast<double>(out.size());
  return {loss, net.backward(tr, d_out)};
}

struct PatchPair {
  Patch input;
  Patch target;
};

struct TrainResult {
  ToyCnn net;
  std::vector<double> epoch_loss;
};

/// Per-patch SGD. Each epoch visits the pairs in a Fisher-Yates order drawn
/// from a generator seeded with config.seed, so runs are reproducible.
inline TrainResult train(ToyCnn net, const std::vector<PatchPair>& pairs, double divergence_limit = 1e6) {
  if (pairs.empty()) throw ArgumentError("train: no training pairs");
  const NetworkConfig& cfg = net.config();
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  TrainResult res;
  Vector params = net.parameters();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double total = 0.0;
    for (std::size_t idx : order) {
      const auto lg = loss_and_gradient(net, pairs[idx].input, pairs[idx].target);
      if (!std::isfinite(lg.loss) || lg.loss > divergence_limit)
        throw TrainingDivergence("train: loss diverged", epoch, lg.loss);
      total += lg.loss;
      params -= cfg.learning_rate * lg.gradient;
      net.set_parameters(params);
    }
    res.epoch_loss.push_back(total / static_cast<double>(pairs.size()));
  }
  res.net = std::move(net);
  return res;
}

// ---------------------------------------------------------------------------
// Parameter file
//
//   offset  size  field
//   0       4     magic "ICNN"
//   4       4     u32 version (1)
//   8       4     u32 depth
//   12      4     u32 width
//   16      4     u32 kernel
//   20      4     u32 skip mode (0 none, 1 global_residual, 2 symmetric_skips)
//   24      8     u64 seed
//   32      ...   per layer: u32 out, u32 in, f64 weights[out][in][k][k], f64 biases[out]
//
// All integers and doubles little-endian.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void put_le(std::ostream& out, T v) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  Bits bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffU);
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw FormatError("parameter file: truncated");
  Bits bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<Bits>(static_cast<Bits>(bytes[i]) << (8 * i));
  T v{};
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace detail

inline void save_parameters(const ToyCnn& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("parameter file: cannot write " + path.string());
  const NetworkConfig& c = net.config();
  out.write("ICNN", 4);
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.depth));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.width));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.kernel));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.skip_mode));
  detail::put_le<std::uint64_t>(out, c.seed);
  for (const auto& l : net.layers()) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_channels));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_channels));
    for (Index o = 0; o < l.weights.rows(); ++o)
      for (Index c2 = 0; c2 < l.weights.cols(); ++c2) detail::put_le<double>(out, l.weights(o, c2));
    for (Index o = 0; o < l.biases.size(); ++o) detail::put_le<double>(out, l.biases[o]);
  }
}

/// Restores a network; training-only fields of the config keep defaults.
inline ToyCnn load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("parameter file: cannot open " + path.string());
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ICNN", 4) != 0) throw FormatError("parameter file: bad magic");
  if (detail::get_le<std::uint32_t>(in) != 1) throw FormatError("parameter file: unsupported version");
  NetworkConfig cfg;
  cfg.depth = static_cast<int>(detail::get_le<std::uint32_t>(in));
  cfg.width = static_cast<int>(detail::get_le<std::uint32_t>(in));
  cfg.kernel = static_cast<int>(detail::get_le<std::uint32_t>(in));
  const auto mode = detail::get_le<std::uint32_t>(in);
  if (mode > 2) throw FormatError("parameter file: bad skip mode");
  cfg.skip_mode = static_cast<SkipMode>(mode);
  cfg.seed = detail::get_le<std::uint64_t>(in);
  ToyCnn net = ToyCnn::zeros(cfg);
  for (auto& l : net.layers()) {
    const auto out_c = detail::get_le<std::uint32_t>(in);
    const auto in_c = detail::get_le<std::uint32_t>(in);
    if (out_c != l.out_channels || in_c != l.in_channels) throw FormatError("parameter file: layer shape mismatch");
    for (Index o = 0; o < l.weights.rows(); ++o)
      for (Index c2 = 0; c2 < l.weights.cols(); ++c2) l.weights(o, c2) = detail::get_le<double>(in);
    for (Index o = 0; o < l.biases.size(); ++o) l.biases[o] = detail::get_le<double>(in);
  }
  return net;
}

}  // namespace invcnn

#endif  // INVCNN_NETWORK_HPP
