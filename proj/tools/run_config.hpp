#ifndef INVCNN_TOOLS_RUN_CONFIG_HPP
#define INVCNN_TOOLS_RUN_CONFIG_HPP

// JSON run configuration for the train / eval / sweep subcommands, and the
// image sources they name.

#include "invcnn/invcnn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace invcnn::tools {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Raised for anything wrong with a config file or a command line value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A directory of PGM files, a manifest, a single PGM, or a synthetic batch.
struct ImageSource {
  fs::path path;
  std::string synthetic;  // "edges" or "texture" when set
  int count = 0;
  Index size = 64;
  std::uint64_t seed = 1;
};

struct CorpusSpec {
  std::string name;
  std::vector<ImageSource> train;
  std::vector<ImageSource> test;
};

struct RunConfig {
  fs::path base_dir;
  json echo;
  NetworkConfig network;
  PairGeometry pairs;
  std::vector<ImageSource> train;
  std::vector<ImageSource> test;
  fs::path output;
  fs::path params;
  fs::path compare_params;
  std::vector<int> depths;
  std::vector<CorpusSpec> corpora;
};

namespace detail_cfg {

inline void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

inline ImageSource parse_source(const json& j, const fs::path& base, const std::string& where) {
  ImageSource s;
  if (j.is_string()) {
    s.path = resolve(base, j.get<std::string>());
    return s;
  }
  only_keys(j, {"synthetic", "count", "size", "seed"}, where);
  s.synthetic = get<std::string>(j, "synthetic", "", where);
  if (s.synthetic != "edges" && s.synthetic != "texture")
    throw ConfigError(where + ".synthetic: expected 'edges' or 'texture'");
  s.count = get<int>(j, "count", 8, where);
  s.size = get<Index>(j, "size", 64, where);
  s.seed = get<std::uint64_t>(j, "seed", 1, where);
  if (s.count < 1 || s.size < 4) throw ConfigError(where + ": count must be >= 1 and size >= 4");
  return s;
}

inline std::vector<ImageSource> parse_sources(const json& obj, const char* key, const fs::path& base,
                                              const std::string& where) {
  std::vector<ImageSource> out;
  if (!obj.contains(key)) return out;
  const json& arr = obj.at(key);
  const std::string w = where + "." + key;
  if (arr.is_string() || arr.is_object()) {
    out.push_back(parse_source(arr, base, w));
    return out;
  }
  if (!arr.is_array()) throw ConfigError(w + ": expected a list of sources");
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_source(arr[i], base, w + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail_cfg

inline RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  using namespace detail_cfg;
  only_keys(doc, {"network", "pairs", "train", "test", "output", "params", "compare_params", "sweep"}, "config");
  RunConfig rc;
  rc.base_dir = base_dir;
  rc.echo = doc;

  if (doc.contains("network")) {
    const json& n = doc.at("network");
    only_keys(n, {"depth", "width", "kernel", "skip_mode", "seed", "learning_rate", "epochs", "init_scale"}, "network");
    NetworkConfig& c = rc.network;
    c.depth = get<int>(n, "depth", c.depth, "network");
    c.width = get<int>(n, "width", c.width, "network");
    c.kernel = get<int>(n, "kernel", c.kernel, "network");
    try {
      c.skip_mode = skip_mode_from_string(get<std::string>(n, "skip_mode", to_string(c.skip_mode), "network"));
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("network.skip_mode: ") + e.what());
    }
    c.seed = get<std::uint64_t>(n, "seed", c.seed, "network");
    c.learning_rate = get<double>(n, "learning_rate", c.learning_rate, "network");
    c.epochs = get<int>(n, "epochs", c.epochs, "network");
    c.init_scale = get<double>(n, "init_scale", c.init_scale, "network");
  }
  try {
    rc.network.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("pairs")) {
    const json& p = doc.at("pairs");
    only_keys(p, {"scale", "target_size", "stride", "max_pairs"}, "pairs");
    rc.pairs.scale = get<int>(p, "scale", rc.pairs.scale, "pairs");
    rc.pairs.target_size = get<Index>(p, "target_size", rc.pairs.target_size, "pairs");
    rc.pairs.stride = get<Index>(p, "stride", rc.pairs.stride, "pairs");
    rc.pairs.max_pairs = get<std::size_t>(p, "max_pairs", rc.pairs.max_pairs, "pairs");
  }
  if (rc.pairs.scale < 1 || rc.pairs.target_size < 1 || rc.pairs.stride < 1)
    throw ConfigError("pairs: scale, target_size and stride must be >= 1");

  rc.train = parse_sources(doc, "train", base_dir, "config");
  rc.test = parse_sources(doc, "test", base_dir, "config");
  if (doc.contains("output")) rc.output = resolve(base_dir, get<std::string>(doc, "output", "", "config"));
  if (doc.contains("params")) rc.params = resolve(base_dir, get<std::string>(doc, "params", "", "config"));
  if (doc.contains("compare_params"))
    rc.compare_params = resolve(base_dir, get<std::string>(doc, "compare_params", "", "config"));

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    only_keys(s, {"depths", "corpora"}, "sweep");
    rc.depths = get<std::vector<int>>(s, "depths", {2, 4, 6, 8, 10}, "sweep");
    if (s.contains("corpora")) {
      const json& cs = s.at("corpora");
      if (!cs.is_array()) throw ConfigError("sweep.corpora: expected a list");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string w = "sweep.corpora[" + std::to_string(i) + "]";
        only_keys(cs[i], {"name", "train", "test"}, w);
        CorpusSpec spec;
        spec.name = get<std::string>(cs[i], "name", "corpus" + std::to_string(i), w);
        spec.train = parse_sources(cs[i], "train", base_dir, w);
        spec.test = parse_sources(cs[i], "test", base_dir, w);
        rc.corpora.push_back(std::move(spec));
      }
    }
  }
  return rc;
}

inline RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc, fs::absolute(file).parent_path());
}

// ---------------------------------------------------------------------------
// Corpus loading
// ---------------------------------------------------------------------------

inline std::vector<fs::path> pgm_files_in(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw ConfigError("cannot read directory " + dir.string());
  for (const auto& e : it)
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

/// Manifest lines are "<relative path>\t<score>", relative to the manifest.
inline std::vector<fs::path> read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read manifest " + file.string());
  std::vector<fs::path> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    out.push_back((file.parent_path() / line.substr(0, tab)).lexically_normal());
  }
  return out;
}

inline std::vector<GrayImage> load_images(const std::vector<ImageSource>& sources) {
  std::vector<GrayImage> images;
  for (const auto& s : sources) {
    if (!s.synthetic.empty()) {
      const auto kind = s.synthetic == "edges" ? SyntheticKind::edges : SyntheticKind::texture;
      for (int i = 0; i < s.count; ++i) images.push_back(synthetic_image(kind, s.size, s.seed + static_cast<std::uint64_t>(i)));
      continue;
    }
    std::vector<fs::path> files;
    if (fs::is_directory(s.path)) {
      files = pgm_files_in(s.path);
    } else if (s.path.extension() == ".manifest") {
      files = read_manifest(s.path);
    } else if (fs::is_regular_file(s.path)) {
      files = {s.path};
    } else {
      throw ConfigError("image source not found: " + s.path.string());
    }
    for (const auto& f : files) images.push_back(load_pgm(f));
  }
  return images;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << text;
}

inline json version_info() {
  return {{"invcnn", "1.0.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"parameter_format", 1}};
}

}  // namespace invcnn::tools

#endif  // INVCNN_TOOLS_RUN_CONFIG_HPP
