// phaseret: far-field intensity -> near-field phase -> 3D surface pipeline.
// Subcommands: simulate | retrieve | reconstruct3d | benchmark | fit-iqa.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "phaseret/fit/untrained.hpp"
#include "phaseret/io.hpp"
#include "phaseret/metrics/mesh_metrics.hpp"
#include "phaseret/metrics/nriqa.hpp"
#include "phaseret/phantom.hpp"
#include "phaseret/rng.hpp"
#include "phaseret/solvers/classical.hpp"
#include "phaseret/surface/mesh.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phaseret;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;

struct CommonOpts {
  std::string out_dir;
  std::uint64_t seed = 0;
};

struct OpticsOpts {
  double wavelength = 1e-6;
  double distance = 5e-5;
  double pitch = 4e-6;
  double i0 = 1.0;
};

struct NetOpts {
  int depth = 3;
  int base_channels = 8;
  int inner_depth = 2;
  int stages = 2;
  double phase_scale = 6.283185307179586;
  double lr = 1e-2;
  std::string optimizer = "adam";
  int log_every = 0;
};

struct FitCliOpts {
  int max_iters = 1000;
  double tol = 1e-4;
  std::string tol_mode = "rel";
  double step_size = 0.0;
  double alpha = 1e-3;
  std::string init = "flat";
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  const char* env_out = std::getenv("PHASERET_OUT_DIR");
  c.out_dir = env_out ? env_out : ".";
  cmd->add_option("--out", c.out_dir, "Output directory (env PHASERET_OUT_DIR)")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->set_config("--config", "", "Plain key=value config file");
}

void add_optics(CLI::App* cmd, OpticsOpts& o) {
  cmd->add_option("--wavelength", o.wavelength, "Illumination wavelength [m]")
      ->capture_default_str();
  cmd->add_option("--distance", o.distance, "Propagation distance [m]")
      ->capture_default_str();
  cmd->add_option("--pitch", o.pitch, "Pixel pitch [m]")->capture_default_str();
  cmd->add_option("--i0", o.i0, "Illumination intensity scale")->capture_default_str();
}

void add_net(CLI::App* cmd, NetOpts& n) {
  cmd->add_option("--depth", n.depth, "Encoder levels")->capture_default_str();
  cmd->add_option("--base-channels", n.base_channels, "Base channel width")
      ->capture_default_str();
  cmd->add_option("--inner-depth", n.inner_depth, "Nested levels per unit")
      ->capture_default_str();
  cmd->add_option("--stages", n.stages, "Parallel bodies (resu2net)")
      ->capture_default_str();
  cmd->add_option("--phase-scale", n.phase_scale, "Phase output range [rad]")
      ->capture_default_str();
  cmd->add_option("--lr", n.lr, "Optimizer learning rate")->capture_default_str();
  cmd->add_option("--optimizer", n.optimizer, "adam|sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  cmd->add_option("--log-every", n.log_every, "Fit log period (0 = off)")
      ->capture_default_str();
}

void add_fit(CLI::App* cmd, FitCliOpts& f) {
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Stopping tolerance")->capture_default_str();
  cmd->add_option("--tol-mode", f.tol_mode, "rel|abs loss-change stopping")
      ->check(CLI::IsMember({"rel", "abs"}))
      ->capture_default_str();
  cmd->add_option("--step-size", f.step_size, "WF step size (0 = auto)")
      ->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Born deconvolution regularization")
      ->capture_default_str();
  cmd->add_option("--init", f.init, "flat|random|spectral initialization")
      ->check(CLI::IsMember({"flat", "random", "spectral"}))
      ->capture_default_str();
}

optics::ImagingConfig make_config(const OpticsOpts& o, int h, int w) {
  optics::ImagingConfig cfg;
  cfg.wavelength = o.wavelength;
  cfg.distance = o.distance;
  cfg.pixel_pitch = o.pitch;
  cfg.i0 = o.i0;
  cfg.height = h;
  cfg.width = w;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const CommonOpts& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_resolved_config(const fs::path& dir,
                           const std::map<std::string, std::string>& kv) {
  std::ofstream os(dir / "config_resolved.txt");
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

solvers::InitKind init_kind(const std::string& name) {
  if (name == "flat") return solvers::InitKind::flat;
  if (name == "random") return solvers::InitKind::random;
  return solvers::InitKind::spectral;
}

void write_trace_csv(const fs::path& path, const std::vector<double>& trace) {
  std::ofstream os(path);
  os << "iteration,loss\n";
  os.precision(17);
  for (size_t i = 0; i < trace.size(); ++i) os << i << "," << trace[i] << "\n";
}

// normalized copy for the no-reference scores
Image2D unit_range(const Image2D& img) {
  const double lo = min_value(img), hi = max_value(img);
  Image2D out = img;
  if (hi - lo > 1e-300)
    for (auto& x : out.v) x = (x - lo) / (hi - lo);
  else
    for (auto& x : out.v) x = 0.0;
  return out;
}

// ---- solver dispatch ---------------------------------------------------------

struct SolveOutcome {
  Image2D phase;
  std::vector<double> trace;
  int iterations = 0;
  std::string terminated = "n/a";
  double wall_time_s = 0.0;
  bool numeric_failure = false;
};

const std::vector<std::string> kSolverNames{"gs", "wf", "born",
                                            "unet", "u2net", "resu2net"};

bool is_network(const std::string& solver) {
  return solver == "unet" || solver == "u2net" || solver == "resu2net";
}

bool cell_applies(const std::string& solver, const std::string& model) {
  if (solver == "gs" || solver == "wf") return model == "full";
  if (solver == "born") return model == "born";
  return true;  // networks run under both diffraction models
}

SolveOutcome run_solver(const std::string& solver, const std::string& model,
                        const Image2D& intensity, const optics::ImagingConfig& cfg,
                        const CommonOpts& common, const NetOpts& net,
                        const FitCliOpts& fitopts, std::ostream* fit_log) {
  SolveOutcome out;
  if (solver == "gs" || solver == "wf") {
    solvers::SolverOptions so;
    so.max_iters = fitopts.max_iters;
    so.tol = fitopts.tol;
    so.step_size = fitopts.step_size;
    so.seed = common.seed;
    so.init = init_kind(fitopts.init);
    solvers::RetrievalResult r = (solver == "gs")
                                     ? gerchberg_saxton(intensity, cfg, so)
                                     : wirtinger_flow(intensity, cfg, so);
    out.phase = std::move(r.phase);
    out.trace = std::move(r.loss_trace);
    out.iterations = r.iterations_run;
    out.terminated = solvers::to_string(r.terminated_by);
    out.numeric_failure = r.terminated_by == solvers::TerminationReason::divergence;
  } else if (solver == "born") {
    out.phase = solvers::fourier_born_inverse(intensity, cfg, fitopts.alpha);
    Image2D repredicted = optics::forward_born(out.phase, cfg);
    double mse = 0.0;
    for (size_t i = 0; i < intensity.v.size(); ++i) {
      const double d = repredicted.v[i] - intensity.v[i];
      mse += d * d;
    }
    out.trace = {mse / double(intensity.v.size())};
    out.terminated = "closed_form";
  } else {
    nets::NetworkSpec spec;
    spec.kind = nets::net_kind_from_string(solver);
    spec.depth = net.depth;
    spec.base_channels = net.base_channels;
    spec.inner_depth = net.inner_depth;
    spec.stages = net.stages;
    spec.phase_scale = net.phase_scale;
    fit::FitOptions fo;
    fo.model = fit::forward_model_from_string(model);
    fo.max_iters = fitopts.max_iters;
    fo.tol = fitopts.tol;
    fo.tol_mode = fitopts.tol_mode == "abs" ? fit::TolMode::absolute
                                            : fit::TolMode::relative;
    fo.lr = net.lr;
    fo.optimizer = net.optimizer == "sgd" ? fit::OptimizerKind::sgd
                                          : fit::OptimizerKind::adam;
    fo.seed = common.seed;
    fo.log_every = net.log_every;
    fo.log_stream = fit_log;
    fit::FitResult r = fit::retrieve_untrained(intensity, cfg, spec, fo);
    out.phase = std::move(r.phase);
    out.trace = std::move(r.loss_trace);
    out.iterations = r.iterations_run;
    out.terminated = solvers::to_string(r.terminated_by);
    out.wall_time_s = r.wall_time_s;
    out.numeric_failure = r.terminated_by == solvers::TerminationReason::divergence;
  }
  return out;
}

// ---- simulate ------------------------------------------------------------------

struct SimulateArgs {
  CommonOpts common;
  OpticsOpts optics;
  std::string phantom = "blob";
  std::string input;
  std::string name = "sim";
  int height = 64;
  int width = 64;
  double amplitude = 1.0;
  double noise_sigma = 0.0;
  std::string model = "full";
};

int cmd_simulate(const SimulateArgs& a) {
  Image2D theta;
  if (a.phantom == "file") {
    if (a.input.empty()) {
      std::cerr << "simulate: --phantom file requires --input\n";
      return kExitUsage;
    }
    theta = io::read_image(a.input);
    for (auto& x : theta.v) x *= a.amplitude;
  } else {
    theta = make_phantom(a.phantom, a.height, a.width, a.common.seed, a.amplitude);
  }
  optics::ImagingConfig cfg = make_config(a.optics, theta.height, theta.width);
  Image2D intensity = (a.model == "born") ? optics::forward_born(theta, cfg)
                                          : optics::forward_full(theta, cfg);
  if (a.noise_sigma > 0.0) {
    Rng rng(a.common.seed + 0x9e3779b97f4a7c15ull);
    const double scale = a.noise_sigma * mean_value(intensity);
    for (auto& x : intensity.v) x = std::max(0.0, x + scale * rng.normal());
  }

  fs::path dir = prepare_out(a.common);
  io::write_raw_grid((dir / (a.name + ".phase.prd")).string(), theta);
  io::write_pgm16((dir / (a.name + ".phase.pgm")).string(), theta);
  io::write_raw_grid((dir / (a.name + ".intensity.prd")).string(), intensity);
  io::write_pgm16((dir / (a.name + ".intensity.pgm")).string(), intensity);
  write_resolved_config(dir, {{"command", "simulate"},
                              {"phantom", a.phantom},
                              {"name", a.name},
                              {"height", std::to_string(theta.height)},
                              {"width", std::to_string(theta.width)},
                              {"amplitude", fmt(a.amplitude)},
                              {"noise_sigma", fmt(a.noise_sigma)},
                              {"model", a.model},
                              {"seed", std::to_string(a.common.seed)},
                              {"wavelength", fmt(a.optics.wavelength)},
                              {"distance", fmt(a.optics.distance)},
                              {"pitch", fmt(a.optics.pitch)},
                              {"i0", fmt(a.optics.i0)}});
  std::cout << "simulate: wrote " << (dir / (a.name + ".intensity.prd")).string()
            << " (+phase, +pgm previews)\n";
  return kExitOk;
}

// ---- retrieve ------------------------------------------------------------------

struct RetrieveArgs {
  CommonOpts common;
  OpticsOpts optics;
  NetOpts net;
  FitCliOpts fitopts;
  std::string input;
  std::string solver;
  std::string model = "full";
  bool model_explicit = false;
};

int cmd_retrieve(RetrieveArgs a) {
  Image2D intensity = io::read_image(a.input);
  optics::ImagingConfig cfg = make_config(a.optics, intensity.height, intensity.width);
  if (!cell_applies(a.solver, a.model)) {
    if (a.model_explicit) {
      std::cerr << "retrieve: solver '" << a.solver << "' does not support model '"
                << a.model << "'\n";
      return kExitUsage;
    }
    a.model = (a.solver == "born") ? "born" : "full";  // classical defaults
  }

  fs::path dir = prepare_out(a.common);
  std::ofstream fit_log_file;
  if (is_network(a.solver) && a.net.log_every > 0)
    fit_log_file.open(dir / "fit_log.csv");

  SolveOutcome r = run_solver(a.solver, a.model, intensity, cfg, a.common, a.net,
                              a.fitopts, fit_log_file.is_open() ? &fit_log_file : nullptr);

  io::write_raw_grid((dir / "phase.prd").string(), r.phase);
  io::write_pgm16((dir / "phase.pgm").string(), r.phase);
  if (r.trace.size() > 1) write_trace_csv(dir / "loss.csv", r.trace);

  json summary;
  summary["command"] = "retrieve";
  summary["input"] = a.input;
  summary["solver"] = a.solver;
  summary["model"] = a.model;
  summary["iterations"] = r.iterations;
  summary["terminated_by"] = r.terminated;
  summary["loss_initial"] = r.trace.empty() ? 0.0 : r.trace.front();
  summary["loss_final"] = r.trace.empty() ? 0.0 : r.trace.back();
  summary["wall_time_s"] = r.wall_time_s;
  summary["seed"] = a.common.seed;
  std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";

  write_resolved_config(dir, {{"command", "retrieve"},
                              {"input", a.input},
                              {"solver", a.solver},
                              {"model", a.model},
                              {"max_iters", std::to_string(a.fitopts.max_iters)},
                              {"tol", fmt(a.fitopts.tol)},
                              {"tol_mode", a.fitopts.tol_mode},
                              {"lr", fmt(a.net.lr)},
                              {"depth", std::to_string(a.net.depth)},
                              {"base_channels", std::to_string(a.net.base_channels)},
                              {"inner_depth", std::to_string(a.net.inner_depth)},
                              {"stages", std::to_string(a.net.stages)},
                              {"phase_scale", fmt(a.net.phase_scale)},
                              {"seed", std::to_string(a.common.seed)},
                              {"wavelength", fmt(a.optics.wavelength)},
                              {"distance", fmt(a.optics.distance)},
                              {"pitch", fmt(a.optics.pitch)},
                              {"i0", fmt(a.optics.i0)}});

  std::cout << "retrieve: " << a.solver << "/" << a.model << " iterations="
            << r.iterations << " terminated_by=" << r.terminated << "\n";
  return r.numeric_failure ? kExitNumeric : kExitOk;
}

// ---- reconstruct3d -------------------------------------------------------------

struct Reconstruct3dArgs {
  CommonOpts common;
  std::string input;
  double tol = 1e-6;
  int max_sweeps = 1000;
  double clamp_eps = 1e-3;
};

int cmd_reconstruct3d(const Reconstruct3dArgs& a) {
  Image2D phase = io::read_image(a.input);
  surface::SurfaceOptions so;
  so.clamp_eps = a.clamp_eps;
  so.sweep.tol = a.tol;
  so.sweep.max_sweeps = a.max_sweeps;
  surface::HeightField hf = surface::reconstruct_surface(phase, so);
  surface::TriangleMesh mesh = mesh_from_height(hf);
  surface::SkewnessStats skew = skewness_stats(mesh);

  fs::path dir = prepare_out(a.common);
  io::write_mesh_obj((dir / "mesh.obj").string(), mesh);
  io::write_raw_grid((dir / "height.prd").string(), hf.u);
  io::write_pgm16((dir / "height.pgm").string(), hf.u, 0.0, 1.0);

  json report;
  report["command"] = "reconstruct3d";
  report["input"] = a.input;
  report["vertices"] = mesh.vertices.size();
  report["triangles"] = mesh.triangles.size();
  report["skewness_mean"] = skew.mean;
  report["skewness_max"] = skew.max;
  std::ofstream(dir / "skewness.json") << report.dump(2) << "\n";

  write_resolved_config(dir, {{"command", "reconstruct3d"},
                              {"input", a.input},
                              {"tol", fmt(a.tol)},
                              {"max_sweeps", std::to_string(a.max_sweeps)},
                              {"clamp_eps", fmt(a.clamp_eps)}});
  std::cout << "reconstruct3d: " << mesh.triangles.size()
            << " triangles, skewness mean=" << skew.mean << " max=" << skew.max
            << "\n";
  return kExitOk;
}

// ---- benchmark -----------------------------------------------------------------

struct BenchmarkArgs {
  CommonOpts common;
  OpticsOpts optics;
  NetOpts net;
  FitCliOpts fitopts;
  std::string images_dir;
  std::string solvers = "gs,wf,born";
  std::string models = "full,born";
  std::string phantom = "blob";
  int count = 1;
  int size = 64;
  double amplitude = 1.0;
  std::string iqa_model_file;
};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

struct BenchImage {
  std::string name;
  Image2D intensity;
  std::optional<Image2D> truth_phase;
};

struct CellScore {
  bool present = false;
  bool failed = false;
  double brisque = 0.0, niqe = 0.0, mesh_mse = 0.0, skew_mean = 0.0, skew_max = 0.0;
  double loss_final = 0.0;
  int iterations = 0;
  bool has_truth = false;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  const std::vector<std::string> solvers = split_csv(a.solvers);
  const std::vector<std::string> models = split_csv(a.models);
  for (const auto& s : solvers) {
    if (std::find(kSolverNames.begin(), kSolverNames.end(), s) == kSolverNames.end()) {
      std::cerr << "benchmark: unknown solver '" << s << "'\n";
      return kExitUsage;
    }
  }

  // assemble the image set: user directory or generated phantoms
  std::vector<BenchImage> images;
  if (!a.images_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.images_dir)) {
      const std::string p = e.path().string();
      const std::string name = e.path().filename().string();
      if (name.find(".phase.") != std::string::npos) continue;  // ground truth
      if (io::ends_with(p, ".pgm") || io::ends_with(p, ".png") ||
          io::ends_with(p, ".prd"))
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      BenchImage img;
      img.name = f.stem().string();
      img.intensity = io::read_image(f.string());
      fs::path stem = f;
      while (!stem.extension().empty()) stem = stem.stem();  // strip .intensity.prd
      fs::path truth = stem;
      truth += ".phase.prd";
      if (fs::exists(truth)) img.truth_phase = io::read_raw_grid(truth.string());
      images.push_back(std::move(img));
    }
    if (images.empty()) {
      std::cerr << "benchmark: no usable images in " << a.images_dir << "\n";
      return kExitUsage;
    }
  } else {
    for (int i = 0; i < a.count; ++i) {
      BenchImage img;
      img.name = a.phantom + std::to_string(i);
      Image2D theta =
          make_phantom(a.phantom, a.size, a.size, a.common.seed + i, a.amplitude);
      optics::ImagingConfig cfg = make_config(a.optics, a.size, a.size);
      img.intensity = optics::forward_full(theta, cfg);
      img.truth_phase = std::move(theta);
      images.push_back(std::move(img));
    }
  }

  metrics::MVGModel iqa_model;
  if (!a.iqa_model_file.empty()) {
    std::ifstream is(a.iqa_model_file, std::ios::binary);
    if (!is) {
      std::cerr << "benchmark: cannot open IQA model " << a.iqa_model_file << "\n";
      return kExitUsage;
    }
    iqa_model = metrics::load_model(is);
  } else {
    iqa_model = metrics::default_pristine_model();
  }

  // cells[model][solver] averaged over images
  std::map<std::string, std::map<std::string, CellScore>> cells;
  fs::path dir = prepare_out(a.common);
  std::ofstream csv(dir / "results.csv");
  csv << "image,solver,model,brisque_f,niqe,mesh_mse,skew_mean,skew_max,"
         "loss_final,iterations\n";
  csv.precision(12);

  for (const auto& model : models) {
    for (const auto& solver : solvers) {
      if (!cell_applies(solver, model)) continue;
      CellScore total;
      total.present = true;
      int n_ok = 0;
      for (const auto& img : images) {
        optics::ImagingConfig cfg =
            make_config(a.optics, img.intensity.height, img.intensity.width);
        CellScore one;
        try {
          SolveOutcome r = run_solver(solver, model, img.intensity, cfg, a.common,
                                      a.net, a.fitopts, nullptr);
          if (r.numeric_failure) throw NumericError("solver diverged");
          Image2D norm_phase = unit_range(r.phase);
          one.brisque = metrics::brisque_score(norm_phase, iqa_model);
          one.niqe = metrics::niqe_score(norm_phase, iqa_model);
          surface::HeightField hf = surface::reconstruct_surface(r.phase);
          surface::TriangleMesh mesh = mesh_from_height(hf);
          surface::SkewnessStats sk = skewness_stats(mesh);
          one.skew_mean = sk.mean;
          one.skew_max = sk.max;
          if (img.truth_phase) {
            surface::HeightField truth_hf = surface::reconstruct_surface(*img.truth_phase);
            one.mesh_mse = metrics::mesh_mse(hf, truth_hf);
            one.has_truth = true;
          }
          one.loss_final = r.trace.empty() ? 0.0 : r.trace.back();
          one.iterations = r.iterations;
        } catch (const std::exception& e) {
          std::cerr << "benchmark: " << img.name << "/" << solver << "/" << model
                    << " failed: " << e.what() << "\n";
          total.failed = true;
          continue;
        }
        csv << img.name << "," << solver << "," << model << "," << one.brisque << ","
            << one.niqe << "," << (one.has_truth ? fmt(one.mesh_mse) : "") << ","
            << one.skew_mean << "," << one.skew_max << "," << one.loss_final << ","
            << one.iterations << "\n";
        total.brisque += one.brisque;
        total.niqe += one.niqe;
        total.mesh_mse += one.mesh_mse;
        total.skew_mean += one.skew_mean;
        total.skew_max += one.skew_max;
        total.loss_final += one.loss_final;
        total.iterations += one.iterations;
        total.has_truth = total.has_truth || one.has_truth;
        ++n_ok;
      }
      if (n_ok > 0) {
        total.brisque /= n_ok;
        total.niqe /= n_ok;
        total.mesh_mse /= n_ok;
        total.skew_mean /= n_ok;
        total.skew_max /= n_ok;
        total.loss_final /= n_ok;
        total.iterations /= n_ok;
      } else {
        total.failed = true;
      }
      cells[model][solver] = total;
    }
  }

  // aligned-text report mirroring the four result tables
  std::ostringstream rep;
  auto table = [&](const std::string& title,
                   const std::function<double(const CellScore&)>& pick,
                   const std::function<bool(const CellScore&)>& available) {
    rep << title << "\n";
    rep << std::left << std::setw(14) << "Method";
    for (const auto& s : solvers) rep << std::setw(12) << s;
    rep << "\n";
    for (const auto& model : models) {
      rep << std::setw(14) << (model == "full" ? "Fourier" : "Fourier-Born");
      for (const auto& s : solvers) {
        auto it = cells[model].find(s);
        if (it == cells[model].end() || !it->second.present || it->second.failed ||
            !available(it->second)) {
          rep << std::setw(12) << "-";
        } else {
          std::ostringstream v;
          v << std::fixed << std::setprecision(4) << pick(it->second);
          rep << std::setw(12) << v.str();
        }
      }
      rep << "\n";
    }
    rep << "\n";
  };
  auto always = [](const CellScore&) { return true; };
  table("BRISQUE-f (lower is better)", [](const CellScore& c) { return c.brisque; },
        always);
  table("NIQE (lower is better)", [](const CellScore& c) { return c.niqe; }, always);
  table("Mesh MSE vs ground truth (lower is better)",
        [](const CellScore& c) { return c.mesh_mse; },
        [](const CellScore& c) { return c.has_truth; });
  table("Mesh skewness, mean (lower is better)",
        [](const CellScore& c) { return c.skew_mean; }, always);

  // qualitative ordering note when all three networks were benchmarked
  const bool all_nets =
      std::count_if(solvers.begin(), solvers.end(), is_network) == 3;
  if (all_nets) {
    for (const auto& model : models) {
      auto get = [&](const std::string& s,
                     const std::function<double(const CellScore&)>& pick,
                     double& out_value) {
        auto it = cells[model].find(s);
        if (it == cells[model].end() || !it->second.present || it->second.failed)
          return false;
        out_value = pick(it->second);
        return true;
      };
      for (const auto& [metric, pick] :
           std::vector<std::pair<std::string, std::function<double(const CellScore&)>>>{
               {"BRISQUE-f", [](const CellScore& c) { return c.brisque; }},
               {"NIQE", [](const CellScore& c) { return c.niqe; }}}) {
        double res = 0, u2 = 0, un = 0;
        if (get("resu2net", pick, res) && get("u2net", pick, u2) &&
            get("unet", pick, un)) {
          const bool holds = res <= u2 && u2 <= un;
          rep << "ordering " << metric << " "
              << (model == "full" ? "Fourier" : "Fourier-Born")
              << ": resu2net<=u2net<=unet : " << (holds ? "yes" : "no") << " ("
              << std::fixed << std::setprecision(4) << res << " / " << u2 << " / "
              << un << ")\n";
        }
      }
    }
  }

  std::ofstream(dir / "report.txt") << rep.str();
  std::cout << rep.str();

  write_resolved_config(dir, {{"command", "benchmark"},
                              {"solvers", a.solvers},
                              {"models", a.models},
                              {"images_dir", a.images_dir},
                              {"phantom", a.phantom},
                              {"count", std::to_string(a.count)},
                              {"size", std::to_string(a.size)},
                              {"amplitude", fmt(a.amplitude)},
                              {"seed", std::to_string(a.common.seed)},
                              {"max_iters", std::to_string(a.fitopts.max_iters)},
                              {"lr", fmt(a.net.lr)}});
  return kExitOk;
}

// ---- fit-iqa -------------------------------------------------------------------

struct FitIqaArgs {
  CommonOpts common;
  std::string corpus_dir;
  std::string out_file = "pristine.mvg";
  int patch = 32;
};

int cmd_fit_iqa(const FitIqaArgs& a) {
  std::vector<Image2D> corpus;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.corpus_dir)) {
    const std::string p = e.path().string();
    if (io::ends_with(p, ".pgm") || io::ends_with(p, ".png")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) corpus.push_back(io::read_image(f.string()));
  if (corpus.empty()) {
    std::cerr << "fit-iqa: no images in " << a.corpus_dir << "\n";
    return kExitUsage;
  }
  metrics::MVGModel model = metrics::fit_pristine_model(corpus, a.patch);
  fs::path dir = prepare_out(a.common);
  std::ofstream os(dir / a.out_file, std::ios::binary);
  metrics::save_model(model, os);
  std::cout << "fit-iqa: fitted " << corpus.size() << " images -> "
            << (dir / a.out_file).string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval and 3D surface reconstruction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic measurement");
  add_common(c_sim, sim.common);
  add_optics(c_sim, sim.optics);
  c_sim->add_option("--phantom", sim.phantom, "blob|steps|text-mask|file")
      ->check(CLI::IsMember({"blob", "steps", "text-mask", "file"}))
      ->capture_default_str();
  c_sim->add_option("--input", sim.input, "Phase image for --phantom file");
  c_sim->add_option("--name", sim.name, "Output base name")->capture_default_str();
  c_sim->add_option("--height", sim.height)->capture_default_str();
  c_sim->add_option("--width", sim.width)->capture_default_str();
  c_sim->add_option("--amplitude", sim.amplitude, "Phase amplitude [rad]")
      ->capture_default_str();
  c_sim->add_option("--noise-sigma", sim.noise_sigma, "Gaussian noise, relative")
      ->capture_default_str();
  c_sim->add_option("--model", sim.model, "full|born forward model")
      ->check(CLI::IsMember({"full", "born"}))
      ->capture_default_str();

  RetrieveArgs ret;
  CLI::App* c_ret = app.add_subcommand("retrieve", "Recover the near-field phase");
  add_common(c_ret, ret.common);
  add_optics(c_ret, ret.optics);
  add_net(c_ret, ret.net);
  add_fit(c_ret, ret.fitopts);
  c_ret->add_option("--input", ret.input, "Measured intensity image")->required();
  c_ret->add_option("--solver", ret.solver, "gs|wf|born|unet|u2net|resu2net")
      ->check(CLI::IsMember(kSolverNames))
      ->required();
  c_ret->add_option("--model", ret.model, "full|born diffraction model")
      ->check(CLI::IsMember({"full", "born"}))
      ->capture_default_str();

  Reconstruct3dArgs rec;
  CLI::App* c_rec = app.add_subcommand("reconstruct3d", "Phase image to 3D mesh");
  add_common(c_rec, rec.common);
  c_rec->add_option("--input", rec.input, "Phase image")->required();
  c_rec->add_option("--tol", rec.tol, "Sweep tolerance")->capture_default_str();
  c_rec->add_option("--max-sweeps", rec.max_sweeps)->capture_default_str();
  c_rec->add_option("--clamp-eps", rec.clamp_eps, "Brightness clamp")
      ->capture_default_str();

  BenchmarkArgs bench;
  CLI::App* c_bench = app.add_subcommand("benchmark", "Score solvers on an image set");
  add_common(c_bench, bench.common);
  add_optics(c_bench, bench.optics);
  add_net(c_bench, bench.net);
  add_fit(c_bench, bench.fitopts);
  c_bench->add_option("--images", bench.images_dir,
                      "Directory of measurement images (else phantoms)");
  c_bench->add_option("--solvers", bench.solvers, "Comma list of solvers")
      ->capture_default_str();
  c_bench->add_option("--models", bench.models, "Comma list of models")
      ->capture_default_str();
  c_bench->add_option("--phantom", bench.phantom, "Phantom kind when generating")
      ->capture_default_str();
  c_bench->add_option("--count", bench.count, "Phantom count")->capture_default_str();
  c_bench->add_option("--size", bench.size, "Phantom size")->capture_default_str();
  c_bench->add_option("--amplitude", bench.amplitude)->capture_default_str();
  c_bench->add_option("--iqa-model", bench.iqa_model_file,
                      "Pristine statistics file (else builtin)");

  FitIqaArgs iqa;
  CLI::App* c_iqa = app.add_subcommand("fit-iqa", "Fit the pristine IQA statistics");
  add_common(c_iqa, iqa.common);
  c_iqa->add_option("--corpus", iqa.corpus_dir, "Directory of reference images")
      ->required();
  c_iqa->add_option("--out-file", iqa.out_file, "Model file name")
      ->capture_default_str();
  c_iqa->add_option("--patch", iqa.patch, "Patch size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  ret.model_explicit = c_ret->count("--model") > 0;

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_ret) return cmd_retrieve(ret);
    if (*c_rec) return cmd_reconstruct3d(rec);
    if (*c_bench) return cmd_benchmark(bench);
    if (*c_iqa) return cmd_fit_iqa(iqa);
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
