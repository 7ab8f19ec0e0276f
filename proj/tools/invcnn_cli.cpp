// invcnn: command-line workbench over the invcnn library.
//
// Exit codes: 0 success, 2 usage or config error, 3 infeasible or empty input,
// 4 precondition violated, 5 numerical failure.

#include "run_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace {

using namespace invcnn;
using namespace invcnn::tools;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kInfeasible = 3;
constexpr int kPrecondition = 4;
constexpr int kNumerical = 5;

struct ExitWith : std::runtime_error {
  ExitWith(int code_, const std::string& what) : std::runtime_error(what), code(code_) {}
  int code;
};

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ExitWith& e) {
    std::cerr << "invcnn: " << e.what() << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "invcnn: config: " << e.what() << "\n";
    return kUsage;
  } catch (const SynthesisFailure& e) {
    std::cerr << "invcnn: infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const PreconditionError& e) {
    std::cerr << "invcnn: precondition: " << e.what() << "\n";
    return kPrecondition;
  } catch (const TrainingDivergence& e) {
    std::cerr << "invcnn: training diverged in epoch " << e.epoch << " (loss " << num(e.loss) << ")\n";
    return kNumerical;
  } catch (const SingularityError& e) {
    std::cerr << "invcnn: " << e.what() << "\n";
    return kNumerical;
  } catch (const FormatError& e) {
    std::cerr << "invcnn: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invcnn: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "invcnn: " << e.what() << "\n";
    return kUsage;
  }
}

std::string csv_coherence(const std::vector<LayerCoherence>& rows) {
  std::ostringstream out;
  out << "layer,defined,min_raw,min_normalized,max_raw,max_normalized\n";
  for (const auto& r : rows)
    out << r.layer << ',' << (r.defined ? 1 : 0) << ',' << num(r.min_raw) << ',' << num(r.min_normalized) << ','
        << num(r.max_raw) << ',' << num(r.max_normalized) << '\n';
  return out.str();
}

json network_json(const NetworkConfig& c) {
  return {{"depth", c.depth},         {"width", c.width},   {"kernel", c.kernel},
          {"skip_mode", to_string(c.skip_mode)}, {"seed", c.seed}, {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},       {"init_scale", c.init_scale}};
}

void write_run_json(const fs::path& dir, const std::string& command, const RunConfig& rc, json extra) {
  json meta = {{"command", command}, {"config", rc.echo}, {"versions", version_info()}};
  for (auto& [k, v] : extra.items()) meta[k] = v;
  write_text(dir / ("run_" + command + ".json"), meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string input;
  std::string tau = "median";
  std::string out;
};

int cmd_split(const SplitArgs& a, int threads) {
  const fs::path in_dir(a.input);
  if (!fs::is_directory(in_dir)) throw ExitWith(kUsage, "split: input directory not found: " + a.input);
  const auto files = pgm_files_in(in_dir);
  if (files.empty()) throw ExitWith(kInfeasible, "split: no PGM images in " + a.input);

  std::vector<double> scores(files.size());
  parallel_for(files.size(), threads, [&](std::size_t i) { scores[i] = spatial_coherency(load_pgm(files[i])).mu; });

  double tau = 0.0;
  if (a.tau == "median") {
    tau = median_threshold(scores);
  } else {
    try {
      std::size_t used = 0;
      tau = std::stod(a.tau, &used);
      if (used != a.tau.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ExitWith(kUsage, "split: --tau must be a number in [0, 1] or 'median'");
    }
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ExitWith(kUsage, "split: --tau must lie in [0, 1]");
  const CorpusSplit split = partition_scores(scores, tau);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  const fs::path out_abs = fs::absolute(out_dir);
  auto manifest = [&](const std::vector<std::size_t>& idx) {
    std::string text;
    for (std::size_t i : idx)
      text += fs::relative(fs::absolute(files[i]), out_abs).generic_string() + "\t" + num(scores[i]) + "\n";
    return text;
  };
  write_text(out_dir / "high.manifest", manifest(split.high));
  write_text(out_dir / "low.manifest", manifest(split.low));

  std::string csv = "path,mu,part\n";
  for (std::size_t i = 0; i < files.size(); ++i)
    csv += files[i].filename().string() + "," + num(scores[i]) + "," + (scores[i] >= tau ? "high" : "low") + "\n";
  write_text(out_dir / "scores.csv", csv);

  constexpr int bins = 10;
  std::vector<int> counts(bins, 0);
  for (double s : scores) counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(s * bins)))]++;
  std::string hist = "bin_lo,bin_hi,count\n";
  for (int b = 0; b < bins; ++b)
    hist += num(static_cast<double>(b) / bins) + "," + num(static_cast<double>(b + 1) / bins) + "," +
            std::to_string(counts[static_cast<std::size_t>(b)]) + "\n";
  write_text(out_dir / "histogram.csv", hist);

  std::cout << "tau " << num(tau) << "  high " << split.high.size() << "  low " << split.low.size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// ist-demo
// ---------------------------------------------------------------------------

struct IstArgs {
  std::vector<int> size{8, 16};
  int sparsity = 2;
  double bias = 0.01;
  std::uint64_t seed = 1;
  bool scale = false;
  bool identity = false;
  int max_iter = 20000;
  double tol = 1e-10;
};

int cmd_ist_demo(const IstArgs& a) {
  const int m = a.size[0];
  const int n = a.size[1];
  if (m < 1 || n < 1 || a.sparsity < 0 || a.sparsity > n || a.bias < 0.0)
    throw ExitWith(kInfeasible, "ist-demo: need M, N >= 1, 0 <= sparsity <= N and bias >= 0");
  if (a.identity && m != n) throw ExitWith(kInfeasible, "ist-demo: --identity needs M == N");

  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> gauss;
  Matrix k(m, n);
  if (a.identity) {
    k = Matrix::Identity(m, n);
  } else {
    for (Index i = 0; i < k.size(); ++i) k.data()[i] = gauss(rng) / std::sqrt(static_cast<double>(m));
  }
  if (a.scale) {
    const double s = spectral_norm(k);
    if (s > 0.0) k /= s;
  }
  Vector truth = Vector::Zero(n);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int i = 0; i < a.sparsity; ++i) truth[idx[static_cast<std::size_t>(i)]] = (gauss(rng) < 0.0 ? -1.0 : 1.0) * mag(rng);
  const Vector g = k * truth;

  IstOptions opt;
  opt.max_iter = a.max_iter;
  opt.tol = a.tol;
  const IstReport rep = ist_solve(k, g, a.bias, opt);

  std::printf("%10s  %20s  %14s\n", "iteration", "objective", "change");
  for (std::size_t it = 1; it <= rep.objective_history.size(); ++it) {
    const bool milestone = it <= 3 || it == rep.objective_history.size() || (it % 10 == 0 && [&] {
      std::size_t p = it;
      while (p % 10 == 0) p /= 10;
      return p == 1;
    }());
    if (milestone)
      std::printf("%10zu  %20.12e  %14.6e\n", it, rep.objective_history[it - 1], rep.residual_history[it - 1]);
  }
  const double kkt = lasso_kkt_residual(k, g, rep.solution, a.bias);
  std::printf("iterations %d  converged %s  kkt_residual %.6e\n", rep.iterations, rep.converged ? "yes" : "no", kkt);
  return kkt < 1e-6 ? kOk : kNumerical;
}

// ---------------------------------------------------------------------------
// neuron-demo
// ---------------------------------------------------------------------------

struct NeuronArgs {
  int superpatch = 8;
  int filter = 3;
  int iters = 1000;
  std::uint64_t seed = 1;
  double bias = 0.01;
};

int cmd_neuron_demo(const NeuronArgs& a) {
  if (a.iters < 0) throw ExitWith(kUsage, "neuron-demo: --iters must be >= 0");
  const NeuronProblem p = random_nonnegative_problem(a.superpatch, a.filter, a.seed, a.bias);
  TrainState gd = p.start;
  TrainState soft = p.start;
  double worst = 0.0;
  std::printf("%8s  %20s  %20s  %12s\n", "step", "mse", "coeff0", "divergence");
  for (int it = 1; it <= a.iters; ++it) {
    gd = gd_step(gd, p.dictionary, p.target);
    soft = gd_step_soft_form(soft, p.dictionary, p.target);
    const double div = (gd.filter.coeffs - soft.filter.coeffs).cwiseAbs().maxCoeff();
    worst = std::max(worst, div);
    if (it <= 10 || it == a.iters)
      std::printf("%8d  %20.12e  %20.12e  %12.3e\n", it, gd.mse_history.back(), gd.filter.coeffs[0], div);
  }
  std::printf("max_divergence %.6e\n", worst);
  if (!(worst < 1e-10)) {
    std::cerr << "invcnn: gradient step and soft-threshold form disagree\n";
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// csc-verify
// ---------------------------------------------------------------------------

struct CscArgs {
  int layers = 2;
  int seeds = 20;
  std::uint64_t seed_base = 1;
  double coherence = 0.1;
  double noise = 0.0;
  std::vector<Index> dims;
  std::vector<Index> sparsities;
  double x_min = 1.0;
  double x_max = 2.0;
  std::string out;
};

int cmd_csc_verify(const CscArgs& a, int threads) {
  if (a.layers < 1 || a.seeds < 1) throw ExitWith(kUsage, "csc-verify: --layers and --seeds must be >= 1");
  SynthesisOptions base;
  base.coherence_target = a.coherence;
  base.noise_bound = a.noise;
  base.x_min = a.x_min;
  base.x_max = a.x_max;
  base.dims = a.dims;
  base.sparsities = a.sparsities;
  if (base.dims.empty())
    for (int i = 0; i <= a.layers; ++i) base.dims.push_back(std::max<Index>(64 - 16 * i, 8));
  if (base.sparsities.empty())
    for (int i = 0; i < a.layers; ++i) base.sparsities.push_back(i == 0 ? 3 : 2);
  if (static_cast<int>(base.sparsities.size()) != a.layers || static_cast<int>(base.dims.size()) != a.layers + 1)
    throw ExitWith(kUsage, "csc-verify: need layers + 1 dims and one sparsity per layer");

  std::vector<StabilityReport> reports(static_cast<std::size_t>(a.seeds));
  parallel_for(reports.size(), threads, [&](std::size_t i) {
    SynthesisOptions opt = base;
    opt.seed = a.seed_base + i;
    reports[i] = verify_instance(synthesize_instance(opt));
  });

  std::ostringstream csv;
  csv << "seed,layer,mu_max,mu_min,sparsity,x_min,x_max,bias,sparsity_rhs,epsilon,condition_met,"
         "support_recovered,error_norm,within_bound\n";
  int met = 0;
  int recovered = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const auto& l : reports[i].layers)
      csv << a.seed_base + i << ',' << l.layer << ',' << num(l.mu_max) << ',' << num(l.mu_min) << ',' << l.sparsity
          << ',' << num(l.x_min) << ',' << num(l.x_max) << ',' << num(l.bias) << ',' << num(l.sparsity_rhs) << ','
          << num(l.epsilon) << ',' << l.condition_met << ',' << l.support_recovered << ',' << num(l.error_norm)
          << ',' << l.within_bound << '\n';
    if (reports[i].all_conditions_met()) {
      ++met;
      if (reports[i].all_recovered()) ++recovered;
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
  std::cerr << "instances " << a.seeds << "  condition met " << met << "  recovered " << recovered << "\n";
  return met == recovered ? kOk : kNumerical;
}

// ---------------------------------------------------------------------------
// train / eval / sweep
// ---------------------------------------------------------------------------

struct ConfigArgs {
  std::string config;
  std::string out;
  std::string params;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

RunConfig load_with_overrides(const ConfigArgs& a) {
  RunConfig rc = load_run_config(a.config);
  if (a.seed) rc.network.seed = *a.seed;
  if (a.epochs) rc.network.epochs = *a.epochs;
  if (!a.out.empty()) rc.output = fs::absolute(a.out);
  if (!a.params.empty()) rc.params = fs::absolute(a.params);
  try {
    rc.network.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (rc.output.empty()) throw ConfigError("no output directory: set \"output\" or pass --out");
  return rc;
}

Index receptive_field(const NetworkConfig& c) { return static_cast<Index>(c.depth) * (c.kernel - 1) + 1; }

int cmd_train(const ConfigArgs& a) {
  const RunConfig rc = load_with_overrides(a);
  if (rc.train.empty()) throw ConfigError("train: no \"train\" sources");
  const auto images = load_images(rc.train);
  const Index rf = receptive_field(rc.network);
  const auto pairs = make_aligned_pairs(images, rc.pairs, rf, rf);
  if (pairs.empty()) throw ExitWith(kInfeasible, "train: the corpus yields no training pairs");

  const TrainResult res = train(ToyCnn::initialized(rc.network), pairs);
  fs::create_directories(rc.output);
  save_parameters(res.net, rc.output / "params.bin");
  std::string loss = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) loss += std::to_string(e + 1) + "," + num(res.epoch_loss[e]) + "\n";
  write_text(rc.output / "loss.csv", loss);
  write_text(rc.output / "coherence.csv", csv_coherence(layer_coherence_report(res.net)));
  write_run_json(rc.output, "train", rc,
                 {{"network", network_json(rc.network)}, {"images", images.size()}, {"pairs", pairs.size()}});
  std::cout << "pairs " << pairs.size() << "  final loss "
            << (res.epoch_loss.empty() ? std::string("n/a") : num(res.epoch_loss.back())) << "\n";
  return kOk;
}

int cmd_eval(const ConfigArgs& a, int threads) {
  const RunConfig rc = load_with_overrides(a);
  if (rc.params.empty()) throw ConfigError("eval: no parameter file (\"params\" or --params)");
  if (rc.test.empty()) throw ConfigError("eval: no \"test\" sources");
  const ToyCnn net = load_parameters(rc.params);
  std::optional<ToyCnn> other;
  if (!rc.compare_params.empty()) other = load_parameters(rc.compare_params);

  const auto images = load_images(rc.test);
  const Index rf = net.receptive_field();
  const Index rf_max = other ? std::max(rf, other->receptive_field()) : rf;
  PairGeometry geo = rc.pairs;
  geo.max_pairs = 0;
  const auto pairs = make_aligned_pairs(images, geo, rf, rf_max);
  if (pairs.size() < 2) throw ExitWith(kInfeasible, "eval: the corpus yields fewer than two test pairs");
  const EvalReport rep = evaluate(net, pairs, threads);
  std::optional<EvalReport> cmp;
  if (other) cmp = evaluate(*other, make_aligned_pairs(images, geo, other->receptive_field(), rf_max), threads);

  std::ostringstream csv;
  csv << "patch,psnr,baseline_psnr" << (cmp ? ",compare_psnr" : "") << "\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    csv << i << ',' << num(rep.psnr_per_patch[i]) << ',' << num(rep.baseline_per_patch[i]);
    if (cmp) csv << ',' << num(cmp->psnr_per_patch[i]);
    csv << '\n';
  }
  fs::create_directories(rc.output);
  write_text(rc.output / "eval.csv", csv.str());
  write_text(rc.output / "coherence.csv", csv_coherence(rep.coherence));

  std::ostringstream sum;
  sum << "metric,value\n";
  sum << "pairs," << pairs.size() << "\n";
  sum << "mean_psnr," << num(rep.mean_psnr) << "\n";
  sum << "mean_baseline_psnr," << num(rep.mean_baseline) << "\n";
  sum << "infinite_count," << rep.infinite_count << "\n";
  sum << "t_vs_baseline," << num(psnr_t_value(rep.psnr_per_patch, rep.baseline_per_patch)) << "\n";
  if (cmp) {
    sum << "compare_mean_psnr," << num(cmp->mean_psnr) << "\n";
    sum << "t_vs_compare," << num(psnr_t_value(rep.psnr_per_patch, cmp->psnr_per_patch)) << "\n";
    write_text(rc.output / "compare_coherence.csv", csv_coherence(cmp->coherence));
  }
  write_text(rc.output / "summary.csv", sum.str());
  write_run_json(rc.output, "eval", rc, {{"network", network_json(net.config())}, {"pairs", pairs.size()}});
  std::cout << sum.str();
  return kOk;
}

int cmd_sweep(const ConfigArgs& a, int threads) {
  const RunConfig rc = load_with_overrides(a);
  if (rc.corpora.empty()) throw ConfigError("sweep: no \"sweep.corpora\"");
  if (rc.depths.empty()) throw ConfigError("sweep: empty depth list");
  for (int d : rc.depths)
    if (d < 2) throw ConfigError("sweep: depths must be >= 2");

  std::ostringstream table, sat;
  table << "corpus,depth,mean_psnr,final_loss,failed,saturated\n";
  sat << "corpus,saturation_depth\n";
  bool any_failed = false;
  for (const auto& corpus : rc.corpora) {
    const auto train_imgs = load_images(corpus.train);
    const auto test_imgs = corpus.test.empty() ? train_imgs : load_images(corpus.test);
    if (train_imgs.empty()) throw ExitWith(kInfeasible, "sweep: corpus '" + corpus.name + "' is empty");
    const SweepResult res = depth_sweep(train_imgs, test_imgs, rc.depths, rc.network, rc.pairs, threads);
    for (const auto& c : res.cells) {
      any_failed = any_failed || c.failed;
      table << corpus.name << ',' << c.depth << ',' << num(c.mean_psnr) << ',' << num(c.final_loss) << ','
            << (c.failed ? 1 : 0) << ',' << (res.saturation_depth && *res.saturation_depth == c.depth ? 1 : 0) << '\n';
    }
    sat << corpus.name << ',' << (res.saturation_depth ? std::to_string(*res.saturation_depth) : std::string("none"))
        << '\n';
  }
  fs::create_directories(rc.output);
  write_text(rc.output / "sweep.csv", table.str());
  write_text(rc.output / "saturation.csv", sat.str());
  write_run_json(rc.output, "sweep", rc, {{"network", network_json(rc.network)}, {"depths", rc.depths}});
  std::cout << sat.str();
  if (any_failed) std::cerr << "invcnn: some sweep cells diverged; see sweep.csv\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "edges";
  int count = 8;
  Index size = 64;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  if (a.count < 1 || a.size < 4) throw ExitWith(kUsage, "synth: --count must be >= 1 and --size >= 4");
  const auto kind = a.kind == "edges" ? SyntheticKind::edges : SyntheticKind::texture;
  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04d.pgm", a.kind.c_str(), i);
    save_pgm(synthetic_image(kind, a.size, a.seed + static_cast<std::uint64_t>(i)), fs::path(a.out) / name);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  invcnn::tune_allocator();
  CLI::App app{"invcnn: inverse-problem view of CNN training"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads; results do not depend on it")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.fallthrough();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "score PGM images by spatial coherency and split them in two");
  c_split->add_option("--input", split.input, "directory of PGM images")->required();
  c_split->add_option("--tau", split.tau, "threshold in [0, 1] or 'median'")->capture_default_str();
  c_split->add_option("--out", split.out, "output directory")->required();

  IstArgs ist;
  auto* c_ist = app.add_subcommand("ist-demo", "solve a random sparse inverse problem by IST");
  c_ist->add_option("--size", ist.size, "rows and columns of K")->expected(2)->capture_default_str();
  c_ist->add_option("--sparsity", ist.sparsity)->capture_default_str();
  c_ist->add_option("--bias", ist.bias, "L1 weight")->capture_default_str();
  c_ist->add_option("--seed", ist.seed)->capture_default_str();
  c_ist->add_option("--max-iter", ist.max_iter)->capture_default_str();
  c_ist->add_option("--tol", ist.tol, "stop when the iterate moves less than this")->capture_default_str();
  c_ist->add_flag("--scale", ist.scale, "divide K by its spectral norm");
  c_ist->add_flag("--identity", ist.identity, "use K = I");

  NeuronArgs neuron;
  auto* c_neuron = app.add_subcommand("neuron-demo", "compare gradient steps with the soft-threshold form");
  c_neuron->add_option("--superpatch", neuron.superpatch)->capture_default_str();
  c_neuron->add_option("--filter", neuron.filter)->capture_default_str();
  c_neuron->add_option("--iters", neuron.iters)->capture_default_str();
  c_neuron->add_option("--seed", neuron.seed)->capture_default_str();
  c_neuron->add_option("--bias", neuron.bias)->capture_default_str();

  CscArgs csc;
  auto* c_csc = app.add_subcommand("csc-verify", "check layered thresholding against its stability bounds");
  c_csc->add_option("--layers", csc.layers)->capture_default_str();
  c_csc->add_option("--seeds", csc.seeds, "number of random instances")->capture_default_str();
  c_csc->add_option("--seed-base", csc.seed_base)->capture_default_str();
  c_csc->add_option("--coherence", csc.coherence, "max-mode coherence target per dictionary")->capture_default_str();
  c_csc->add_option("--noise", csc.noise, "L2 norm of the observation noise")->capture_default_str();
  c_csc->add_option("--dims", csc.dims, "signal length, then each representation length")->delimiter(',');
  c_csc->add_option("--sparsities", csc.sparsities, "nonzeros per layer")->delimiter(',');
  c_csc->add_option("--xmin", csc.x_min)->capture_default_str();
  c_csc->add_option("--xmax", csc.x_max)->capture_default_str();
  c_csc->add_option("--out", csc.out, "CSV file (default stdout)");

  ConfigArgs train_a, eval_a, sweep_a;
  auto config_cmd = [&](const char* name, const char* help, ConfigArgs& args) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--config", args.config, "JSON run configuration")->required();
    c->add_option("--out", args.out, "output directory (overrides the config)");
    c->add_option("--seed", args.seed, "overrides network.seed");
    c->add_option("--epochs", args.epochs, "overrides network.epochs");
    return c;
  };
  auto* c_train = config_cmd("train", "train a network", train_a);
  auto* c_eval = config_cmd("eval", "evaluate trained parameters", eval_a);
  c_eval->add_option("--params", eval_a.params, "parameter file (overrides the config)");
  auto* c_sweep = config_cmd("sweep", "train one network per depth per corpus", sweep_a);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic PGM corpus");
  c_synth->add_option("--kind", synth.kind)->check(CLI::IsMember({"edges", "texture"}))->capture_default_str();
  c_synth->add_option("--count", synth.count)->capture_default_str();
  c_synth->add_option("--size", synth.size)->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_option("--out", synth.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*c_split) return guarded([&] { return cmd_split(split, threads); });
  if (*c_ist) return guarded([&] { return cmd_ist_demo(ist); });
  if (*c_neuron) return guarded([&] { return cmd_neuron_demo(neuron); });
  if (*c_csc) return guarded([&] { return cmd_csc_verify(csc, threads); });
  if (*c_train) return guarded([&] { return cmd_train(train_a); });
  if (*c_eval) return guarded([&] { return cmd_eval(eval_a, threads); });
  if (*c_sweep) return guarded([&] { return cmd_sweep(sweep_a, threads); });
  if (*c_synth) return guarded([&] { return cmd_synth(synth); });
  return kUsage;
}
