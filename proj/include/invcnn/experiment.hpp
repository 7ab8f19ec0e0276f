#ifndef INVCNN_EXPERIMENT_HPP
#define INVCNN_EXPERIMENT_HPP

// Desk-scale superresolution experiments: patch-pair extraction, evaluation,
// per-layer coherence of trained filters, and depth sweeps.

#include "invcnn/csc.hpp"
#include "invcnn/image.hpp"
#include "invcnn/network.hpp"
#include "invcnn/stats.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace invcnn {

/// Runs fn(0) .. fn(n - 1) on up to `threads` workers. Each index is handled
/// by exactly one call, so results written by index are thread-count independent.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Low-resolution observation of `img` brought back to its own size:
/// bicubic downscale by 1/scale, then bicubic upscale by scale. The image is
/// first trimmed to a multiple of the scale.
inline std::pair<GrayImage, GrayImage> degrade_and_upsample(const GrayImage& img, int scale) {
  if (scale < 1) throw ArgumentError("degrade_and_upsample: scale must be >= 1");
  const Index rows = img.rows() / scale * scale;
  const Index cols = img.cols() / scale * scale;
  if (rows < 1 || cols < 1) throw DimensionError("degrade_and_upsample: image smaller than the scale");
  GrayImage hr = img.topLeftCorner(rows, cols);
  if (scale == 1) return {hr, hr};
  GrayImage up = bicubic_resize(bicubic_resize(hr, 1.0 / scale), static_cast<double>(scale));
  return {hr, up};
}

/// Inputs are superpatch x superpatch windows of the upsampled observation;
/// targets are the matching centre windows of the original, shrunk by the
/// receptive field so that valid network outputs line up with them.
inline std::vector<PatchPair> make_sr_pairs(const std::vector<GrayImage>& images, int scale, Index superpatch,
                                            Index stride, Index receptive_field) {
  if (stride < 1) throw ArgumentError("make_sr_pairs: stride must be >= 1");
  if (receptive_field < 1 || superpatch < receptive_field)
    throw DimensionError("make_sr_pairs: superpatch must cover the receptive field");
  const Index t = superpatch - receptive_field + 1;
  const Index off = (receptive_field - 1) / 2;
  std::vector<PatchPair> pairs;
  for (const auto& img : images) {
    const auto [hr, up] = degrade_and_upsample(img, scale);
    for (Index i = 0; i + superpatch <= hr.rows(); i += stride)
      for (Index j = 0; j + superpatch <= hr.cols(); j += stride)
        pairs.push_back({up.block(i, j, superpatch, superpatch), hr.block(i + off, j + off, t, t)});
  }
  return pairs;
}

struct LayerCoherence {
  std::size_t layer = 0;  // 1-based
  bool defined = false;   // false for single-filter layers
  double min_raw = std::numeric_limits<double>::quiet_NaN();
  double min_normalized = std::numeric_limits<double>::quiet_NaN();
  double max_raw = std::numeric_limits<double>::quiet_NaN();
  double max_normalized = std::numeric_limits<double>::quiet_NaN();
};

/// Each layer's filters, flattened across input channels, form the columns
/// of its reconstruction dictionary.
inline std::vector<LayerCoherence> layer_coherence_report(const ToyCnn& net) {
  std::vector<LayerCoherence> rows;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const ConvLayer& l = net.layers()[li];
    LayerCoherence r;
    r.layer = li + 1;
    if (l.out_channels >= 2) {
      std::vector<Vector> filters;
      for (Index o = 0; o < l.out_channels; ++o) filters.push_back(l.filter(o));
      const Matrix d = build_reconstruction_dictionary(filters).data;
      r.defined = true;
      r.min_raw = mutual_coherence(d, CoherenceMode::min, false);
      r.min_normalized = mutual_coherence(d, CoherenceMode::min, true);
      r.max_raw = mutual_coherence(d, CoherenceMode::max, false);
      r.max_normalized = mutual_coherence(d, CoherenceMode::max, true);
    }
    rows.push_back(r);
  }
  return rows;
}

struct EvalReport {
  std::vector<double> psnr_per_patch;      // network output vs target, dB
  std::vector<double> baseline_per_patch;  // bicubic (cropped input) vs target
  double mean_psnr = 0.0;                  // over finite entries
  double mean_baseline = 0.0;
  std::size_t infinite_count = 0;
  std::vector<LayerCoherence> coherence;
};

namespace detail {

inline double finite_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::infinity() : s / static_cast<double>(n);
}

}  // namespace detail

inline EvalReport evaluate(const ToyCnn& net, const std::vector<PatchPair>& pairs, int threads = 1) {
  EvalReport rep;
  rep.psnr_per_patch.resize(pairs.size());
  rep.baseline_per_patch.resize(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const GrayImage out = net.forward(pairs[i].input);
    rep.psnr_per_patch[i] = psnr(out, pairs[i].target);
    rep.baseline_per_patch[i] =
        psnr(center_crop(pairs[i].input, pairs[i].target.rows(), pairs[i].target.cols()), pairs[i].target);
  });
  rep.infinite_count = static_cast<std::size_t>(
      std::count_if(rep.psnr_per_patch.begin(), rep.psnr_per_patch.end(), [](double v) { return std::isinf(v); }));
  rep.mean_psnr = detail::finite_mean(rep.psnr_per_patch);
  rep.mean_baseline = detail::finite_mean(rep.baseline_per_patch);
  rep.coherence = layer_coherence_report(net);
  return rep;
}

/// Welch T between two per-patch PSNR sets, ignoring infinite entries.
inline double psnr_t_value(const std::vector<double>& set1, const std::vector<double>& set2) {
  auto finite = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v)
      if (std::isfinite(x)) out.push_back(x);
    return out;
  };
  return welch_t(finite(set1), finite(set2));
}

// ---------------------------------------------------------------------------
// Depth sweeps
// ---------------------------------------------------------------------------

struct PairGeometry {
  int scale = 2;
  Index target_size = 12;
  Index stride = 8;
  std::size_t max_pairs = 0;  // 0 keeps all
};

/// Pairs for a network of receptive field `rf`, with targets placed exactly
/// where a network of receptive field `rf_max` would place them. This keeps
/// the evaluated pixels identical across depths.
inline std::vector<PatchPair> make_aligned_pairs(const std::vector<GrayImage>& images, const PairGeometry& geo,
                                                 Index rf, Index rf_max) {
  if (rf > rf_max) throw ArgumentError("make_aligned_pairs: rf exceeds rf_max");
  const Index margin = (rf_max - rf) / 2;
  std::vector<PatchPair> pairs;
  for (const auto& img : images) {
    const auto [hr, up] = degrade_and_upsample(img, geo.scale);
    if (hr.rows() <= 2 * margin || hr.cols() <= 2 * margin) continue;
    const Index superpatch = geo.target_size + rf - 1;
    const Index off = (rf - 1) / 2;
    const Index rows = hr.rows() - 2 * margin;
    const Index cols = hr.cols() - 2 * margin;
    for (Index i = 0; i + superpatch <= rows; i += geo.stride)
      for (Index j = 0; j + superpatch <= cols; j += geo.stride)
        pairs.push_back({up.block(margin + i, margin + j, superpatch, superpatch),
                         hr.block(margin + i + off, margin + j + off, geo.target_size, geo.target_size)});
  }
  if (geo.max_pairs > 0 && pairs.size() > geo.max_pairs) {
    // Even subsample keeps the spatial spread of the corpus.
    std::vector<PatchPair> kept;
    for (std::size_t k = 0; k < geo.max_pairs; ++k) kept.push_back(pairs[k * pairs.size() / geo.max_pairs]);
    pairs = std::move(kept);
  }
  return pairs;
}

struct SweepCell {
  int depth = 0;
  double mean_psnr = std::numeric_limits<double>::quiet_NaN();
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string note;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::optional<int> saturation_depth;
};

/// Smallest depth whose PSNR is within `tolerance_db` of the best in the sweep.
inline std::optional<int> saturation_depth(const std::vector<SweepCell>& cells, double tolerance_db = 0.05) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cells)
    if (!c.failed && std::isfinite(c.mean_psnr)) best = std::max(best, c.mean_psnr);
  std::optional<int> sat;
  for (const auto& c : cells)
    if (!c.failed && std::isfinite(c.mean_psnr) && c.mean_psnr >= best - tolerance_db)
      if (!sat || c.depth < *sat) sat = c.depth;
  return sat;
}

/// Trains one network per depth (all other settings from `base`) on the
/// training images and scores it on the test images. A diverging cell is
/// marked failed; the sweep continues.
inline SweepResult depth_sweep(const std::vector<GrayImage>& train_images, const std::vector<GrayImage>& test_images,
                               const std::vector<int>& depths, const NetworkConfig& base, const PairGeometry& geo,
                               int threads = 1) {
  if (depths.empty()) throw ArgumentError("depth_sweep: no depths");
  const int max_depth = *std::max_element(depths.begin(), depths.end());
  const Index rf_max = static_cast<Index>(max_depth) * (base.kernel - 1) + 1;
  SweepResult res;
  res.cells.resize(depths.size());
  parallel_for(depths.size(), threads, [&](std::size_t i) {
    NetworkConfig cfg = base;
    cfg.depth = depths[i];
    const Index rf = static_cast<Index>(cfg.depth) * (cfg.kernel - 1) + 1;
    SweepCell& cell = res.cells[i];
    cell.depth = cfg.depth;
    try {
      const auto train_pairs = make_aligned_pairs(train_images, geo, rf, rf_max);
      PairGeometry test_geo = geo;
      test_geo.max_pairs = 0;
      const auto test_pairs = make_aligned_pairs(test_images, test_geo, rf, rf_max);
      TrainResult tr = train(ToyCnn::initialized(cfg), train_pairs);
      cell.final_loss = tr.epoch_loss.empty() ? std::numeric_limits<double>::quiet_NaN() : tr.epoch_loss.back();
      cell.mean_psnr = evaluate(tr.net, test_pairs).mean_psnr;
    } catch (const TrainingDivergence& e) {
      cell.failed = true;
      cell.note = e.what();
    }
  });
  res.saturation_depth = saturation_depth(res.cells);
  return res;
}

}  // namespace invcnn

#endif  // INVCNN_EXPERIMENT_HPP
