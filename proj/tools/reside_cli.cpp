// Command-line front end: synthetic data generation, reconstruction by
// zero-filled / l1-wavelet / pnp-median / reside, evaluation, and the SNR
// schedule ablation. Every reconstruction writes a manifest next to its
// output; feeding a manifest back via --config reproduces the run byte for
// byte.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reside/config.hpp"
#include "reside/io.hpp"
#include "reside/masks.hpp"
#include "reside/median.hpp"
#include "reside/metrics.hpp"
#include "reside/parallel.hpp"
#include "reside/phantom.hpp"
#include "reside/reside.hpp"
#include "reside/wavelet.hpp"

namespace {

using namespace reside;

constexpr const char* kToolVersion = RESIDE_VERSION_STRING;

struct TraceRow {
  double t = 0.0;
  double snr_db = std::nan("");
  double sigma = std::nan("");
  double train_loss = std::nan("");
  double nmse_db_value = std::nan("");
};

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "t,snr_db,sigma,train_loss,nmse_db\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", row.t, row.snr_db, row.sigma,
                  row.train_loss, row.nmse_db_value);
    out << buf;
  }
  if (!out) throw io_error("write failed: " + path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// precedence: profile defaults < config file < --set pairs < dedicated flags
RunConfig build_config(const std::string& profile_flag, const std::string& config_path,
                       const std::vector<std::string>& set_pairs) {
  std::optional<KeyValueText> file_kv;
  if (!config_path.empty()) file_kv = KeyValueText::parse_file(config_path);

  std::string profile = "desk";
  if (file_kv && file_kv->has("profile")) profile = file_kv->get("profile");
  if (!profile_flag.empty()) profile = profile_flag;

  RunConfig cfg = RunConfig::with_profile(profile);
  if (file_kv) cfg.apply(*file_kv);

  KeyValueText overrides;
  for (const std::string& pair : set_pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + pair);
    overrides.set(pair.substr(0, eq), pair.substr(eq + 1));
  }
  cfg.apply(overrides);
  return cfg;
}

struct ReconResult {
  ComplexGrid image;
  std::vector<TraceRow> trace;
  DenoiserNet<float> net;
  bool have_net = false;
};

ReconResult run_method(const RunConfig& cfg, const ForwardOperator& op, const ComplexGrid& y,
                       const ComplexGrid* truth, bool want_net) {
  ReconResult result{ComplexGrid(op.rows(), op.cols()), {}, {}, false};
  const auto nmse_of = [&](const ComplexGrid& x) {
    return truth != nullptr ? nmse_db(*truth, x) : std::nan("");
  };

  if (cfg.method == "zero-filled") {
    result.image = apply_adjoint(op, apply_mask(op.mask, y));
    TraceRow row;
    row.t = 0.0;
    row.nmse_db_value = nmse_of(result.image);
    result.trace.push_back(row);
    return result;
  }

  if (cfg.method == "l1-wavelet" || cfg.method == "pnp-median") {
    const std::size_t div = std::size_t{1} << cfg.wavelet.levels;
    if (cfg.method == "l1-wavelet" && (op.rows() % div != 0 || op.cols() % div != 0))
      throw std::invalid_argument(
          "l1-wavelet requires grid dimensions divisible by 2^wavelet.levels");

    PdsParams params = cfg.pds;
    params.iterations = cfg.pds_iterations_baseline;
    Denoiser denoiser;
    if (cfg.method == "l1-wavelet") {
      const WaveletConfig wcfg = cfg.wavelet;
      const double nu = params.nu;
      denoiser = [wcfg, nu](const ComplexGrid& u) { return wavelet_prox_denoise(u, wcfg, nu); };
    } else {
      denoiser = [](const ComplexGrid& u) { return median_denoise_3x3(u); };
    }
    result.image =
        pnp_reconstruct(op, y, params, denoiser, [&](std::size_t t, const ComplexGrid& x) {
          if (!x.all_finite())
            throw numerical_error("non-finite iterate at iteration " + std::to_string(t), t);
          TraceRow row;
          row.t = static_cast<double>(t);
          row.nmse_db_value = nmse_of(x);
          result.trace.push_back(row);
        });
    return result;
  }

  if (cfg.method == "reside") {
    result.image = reside_reconstruct(
        op, y, cfg.reside,
        [&](const ResideTraceRecord& rec) {
          TraceRow row;
          row.t = static_cast<double>(rec.t);
          row.snr_db = rec.snr_db;
          row.sigma = rec.sigma;
          row.train_loss = rec.train_loss;
          row.nmse_db_value = nmse_of(*rec.x);
          result.trace.push_back(row);
        },
        want_net ? &result.net : nullptr);
    result.have_net = want_net;
    return result;
  }

  throw std::invalid_argument("unknown method: " + cfg.method);
}

void write_manifest(const std::string& out_path, const std::string& command, RunConfig cfg,
                    const SamplingMask& mask, const std::optional<double>& final_nmse,
                    double wall_seconds, const std::string& trace_path) {
  KeyValueText kv;
  kv.set("meta.tool", std::string("reside ") + kToolVersion);
  kv.set("meta.command", command);
  kv.set("meta.profile", cfg.profile);
  KeyValueText snap = cfg.snapshot();
  for (const auto& [key, value] : snap.entries()) kv.set(key, value);
  kv.set_double("info.achieved_r", mask.acceleration());
  kv.set_uint("info.mask_samples", mask.sample_count());
  kv.set_double("result.wall_seconds", wall_seconds);
  if (final_nmse) kv.set_double("result.nmse_db", *final_nmse);
  kv.set("output.image", out_path);
  if (!trace_path.empty()) kv.set("output.trace", trace_path);

  const std::string manifest_path = out_path + ".manifest.txt";
  std::ofstream out(manifest_path);
  if (!out) throw io_error("cannot open for writing: " + manifest_path);
  out << kv.serialize();
  if (!out) throw io_error("write failed: " + manifest_path);
}

int run_reconstruct(RunConfig cfg, const std::string& out_path, const std::string& trace_path,
                    const std::string& save_net_path, const std::string& command) {
  if (cfg.kspace_path.empty() || cfg.mask_path.empty())
    throw std::invalid_argument("reconstruct needs --kspace and --mask (or a manifest --config)");

  set_thread_count(cfg.threads);
  const ComplexGrid y = read_grid(cfg.kspace_path);
  const SamplingMask mask = read_mask(cfg.mask_path);
  if (y.rows() != mask.rows() || y.cols() != mask.cols())
    throw std::invalid_argument("k-space and mask shapes differ");
  const ForwardOperator op(mask);

  std::optional<ComplexGrid> truth;
  if (!cfg.truth_path.empty()) {
    truth = read_grid(cfg.truth_path);
    if (!truth->same_shape(y)) throw std::invalid_argument("truth and k-space shapes differ");
  }

  const auto t0 = std::chrono::steady_clock::now();
  ReconResult result =
      run_method(cfg, op, y, truth ? &*truth : nullptr, !save_net_path.empty());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_grid(out_path, result.image, GridDtype::complex128);
  write_magnitude_pgm(out_path + ".pgm", result.image);

  std::optional<double> final_nmse;
  if (truth) {
    final_nmse = nmse_db(*truth, result.image);
    write_error_pgm(out_path + ".err.pgm", *truth, result.image);
  }
  if (!trace_path.empty()) write_trace_csv(trace_path, result.trace);
  if (!save_net_path.empty() && result.have_net) write_net(save_net_path, result.net);

  write_manifest(out_path, command, cfg, mask, final_nmse, wall, trace_path);

  std::cout << "wrote = " << out_path << "\n";
  if (final_nmse) std::cout << "nmse_db = " << fmt_double(*final_nmse) << "\n";
  return 0;
}

int run_ablate(RunConfig base, const std::string& out_dir) {
  if (base.kspace_path.empty() || base.mask_path.empty() || base.truth_path.empty())
    throw std::invalid_argument("ablate-schedule needs --kspace, --mask, and --truth");
  std::filesystem::create_directories(out_dir);

  struct Variant {
    const char* name;
    SnrSchedule::Mode mode;
    double fixed_db;
  };
  const Variant variants[] = {
      {"fixed10", SnrSchedule::Mode::fixed, 10.0},
      {"fixed25", SnrSchedule::Mode::fixed, 25.0},
      {"progressive", SnrSchedule::Mode::progressive, 0.0},
  };

  std::ostringstream summary;
  summary << "schedule,final_nmse_db,best_nmse_db\n";
  for (const auto& variant : variants) {
    RunConfig cfg = base;
    cfg.method = "reside";
    cfg.reside.schedule.mode = variant.mode;
    if (variant.mode == SnrSchedule::Mode::fixed)
      cfg.reside.schedule.fixed_db = variant.fixed_db;

    const std::string stem = (std::filesystem::path(out_dir) /
                              (std::string("reside_") + variant.name))
                                 .string();
    run_reconstruct(cfg, stem + ".rsdg", stem + ".csv", "", "ablate-schedule");

    // summarize from the trace we just wrote
    std::ifstream in(stem + ".csv");
    std::string line;
    std::getline(in, line);  // header
    double final_nmse = std::nan(""), best = std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
      const auto last_comma = line.rfind(',');
      final_nmse = std::stod(line.substr(last_comma + 1));
      best = std::min(best, final_nmse);
    }
    summary << variant.name << "," << fmt_double(final_nmse) << "," << fmt_double(best) << "\n";
  }

  const std::string summary_path = (std::filesystem::path(out_dir) / "summary.csv").string();
  std::ofstream out(summary_path);
  if (!out) throw io_error("cannot open for writing: " + summary_path);
  out << summary.str();
  std::cout << summary.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("reside ") + kToolVersion +
               " - self-calibrated reconstruction for undersampled k-space"};
  app.require_subcommand(1);

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic test image");
  std::size_t ph_size = 128;
  std::string ph_phase = "none";
  std::string ph_out;
  phantom_cmd->add_option("--size", ph_size, "grid size n (n x n)")->capture_default_str();
  phantom_cmd->add_option("--phase", ph_phase, "none | smooth")
      ->check(CLI::IsMember({"none", "smooth"}))
      ->capture_default_str();
  phantom_cmd->add_option("--out", ph_out, "output .rsdg path")->required();

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "generate a k-space sampling mask");
  std::string mk_kind = "m2";
  double mk_rate = 1.8;
  std::size_t mk_acs = 32;
  std::uint64_t mk_seed = 0;
  std::size_t mk_rows = 128, mk_cols = 128;
  std::string mk_out;
  mask_cmd->add_option("--kind", mk_kind, "m1 | m2 | full")
      ->check(CLI::IsMember({"m1", "m2", "full"}))
      ->capture_default_str();
  mask_cmd->add_option("--rate", mk_rate, "target acceleration R")->capture_default_str();
  mask_cmd->add_option("--acs", mk_acs, "fully sampled central lines")->capture_default_str();
  mask_cmd->add_option("--seed", mk_seed, "rng seed")->capture_default_str();
  mask_cmd->add_option("--rows", mk_rows, "k-space rows")->capture_default_str();
  mask_cmd->add_option("--cols", mk_cols, "k-space cols")->capture_default_str();
  mask_cmd->add_option("--out", mk_out, "output .rsdm path")->required();

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "synthesize undersampled measurements");
  std::string ms_image, ms_mask, ms_out;
  double ms_noise = 0.0;
  std::uint64_t ms_seed = 0;
  measure_cmd->add_option("--image", ms_image, "input image .rsdg")->required();
  measure_cmd->add_option("--mask", ms_mask, "sampling mask .rsdm")->required();
  measure_cmd->add_option("--noise-std", ms_noise, "per-component noise std")
      ->capture_default_str();
  measure_cmd->add_option("--seed", ms_seed, "rng seed")->capture_default_str();
  measure_cmd->add_option("--out", ms_out, "output k-space .rsdg")->required();

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "reconstruct an image from k-space");
  std::string rc_method, rc_kspace, rc_mask, rc_truth, rc_config, rc_trace, rc_out, rc_profile;
  std::string rc_save_net;
  std::vector<std::string> rc_set;
  int rc_threads = -1;
  rec_cmd->add_option("--method", rc_method, "zero-filled | l1-wavelet | pnp-median | reside")
      ->check(CLI::IsMember({"zero-filled", "l1-wavelet", "pnp-median", "reside"}));
  rec_cmd->add_option("--kspace", rc_kspace, "measured k-space .rsdg");
  rec_cmd->add_option("--mask", rc_mask, "sampling mask .rsdm");
  rec_cmd->add_option("--truth", rc_truth, "ground-truth image for NMSE reporting");
  rec_cmd->add_option("--config", rc_config, "key=value config file or manifest");
  rec_cmd->add_option("--profile", rc_profile, "desk | paper");
  rec_cmd->add_option("--trace-out", rc_trace, "per-iteration CSV path");
  rec_cmd->add_option("--set", rc_set, "override a config key, e.g. --set reside.iterations=10");
  rec_cmd->add_option("--threads", rc_threads, "worker threads (0 = hardware)");
  rec_cmd->add_option("--save-net", rc_save_net, "write the final denoiser as .rsdn (reside)");
  rec_cmd->add_option("--out", rc_out, "output image .rsdg")->required();

  // ablate-schedule
  auto* abl_cmd = app.add_subcommand("ablate-schedule",
                                     "run reside under fixed-10dB, fixed-25dB, and progressive "
                                     "training SNR schedules");
  std::string ab_kspace, ab_mask, ab_truth, ab_config, ab_profile, ab_dir;
  std::vector<std::string> ab_set;
  int ab_threads = -1;
  abl_cmd->add_option("--kspace", ab_kspace, "measured k-space .rsdg")->required();
  abl_cmd->add_option("--mask", ab_mask, "sampling mask .rsdm")->required();
  abl_cmd->add_option("--truth", ab_truth, "ground-truth image")->required();
  abl_cmd->add_option("--config", ab_config, "key=value config file");
  abl_cmd->add_option("--profile", ab_profile, "desk | paper");
  abl_cmd->add_option("--set", ab_set, "override a config key");
  abl_cmd->add_option("--threads", ab_threads, "worker threads (0 = hardware)");
  abl_cmd->add_option("--out-dir", ab_dir, "output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "print NMSE (dB) of an estimate against a truth");
  std::string ev_truth, ev_estimate;
  eval_cmd->add_option("--truth", ev_truth, "ground-truth .rsdg")->required();
  eval_cmd->add_option("--estimate", ev_estimate, "estimate .rsdg")->required();

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(phantom_cmd)) {
      PhantomSpec spec;
      spec.size = ph_size;
      spec.phase =
          ph_phase == "smooth" ? PhantomSpec::Phase::smooth_quadratic : PhantomSpec::Phase::none;
      const ComplexGrid img = gen_phantom(spec);
      write_grid(ph_out, img, GridDtype::complex128);
      write_magnitude_pgm(ph_out + ".pgm", img);
      std::cout << "norm2 = " << fmt_double(img.norm2()) << "\n";
      return 0;
    }

    if (app.got_subcommand(mask_cmd)) {
      MaskSpec spec;
      spec.kind = mk_kind == "m1"   ? MaskSpec::Kind::variable_density_1d
                  : mk_kind == "m2" ? MaskSpec::Kind::uniform_random_2d
                                    : MaskSpec::Kind::full;
      spec.target_r = mk_rate;
      spec.acs_lines = mk_acs;
      spec.seed = mk_seed;
      const SamplingMask mask = gen_mask(spec, mk_rows, mk_cols);
      write_mask(mk_out, mask);
      std::cout << "achieved_r = " << fmt_double(mask.acceleration()) << "\n";
      return 0;
    }

    if (app.got_subcommand(measure_cmd)) {
      const ComplexGrid img = read_grid(ms_image);
      const SamplingMask mask = read_mask(ms_mask);
      const ComplexGrid y = synthesize_measurements(img, mask, ms_noise, ms_seed);
      write_grid(ms_out, y, GridDtype::complex128);
      std::cout << "samples = " << mask.sample_count() << "\n";
      return 0;
    }

    if (app.got_subcommand(rec_cmd)) {
      RunConfig cfg = build_config(rc_profile, rc_config, rc_set);
      if (!rc_method.empty()) cfg.method = rc_method;
      if (!rc_kspace.empty()) cfg.kspace_path = rc_kspace;
      if (!rc_mask.empty()) cfg.mask_path = rc_mask;
      if (!rc_truth.empty()) cfg.truth_path = rc_truth;
      if (rc_threads >= 0) cfg.threads = static_cast<unsigned>(rc_threads);
      return run_reconstruct(cfg, rc_out, rc_trace, rc_save_net, "reconstruct");
    }

    if (app.got_subcommand(abl_cmd)) {
      RunConfig cfg = build_config(ab_profile, ab_config, ab_set);
      cfg.kspace_path = ab_kspace;
      cfg.mask_path = ab_mask;
      cfg.truth_path = ab_truth;
      if (ab_threads >= 0) cfg.threads = static_cast<unsigned>(ab_threads);
      return run_ablate(cfg, ab_dir);
    }

    if (app.got_subcommand(eval_cmd)) {
      const ComplexGrid truth = read_grid(ev_truth);
      const ComplexGrid estimate = read_grid(ev_estimate);
      std::printf("%.9g\n", nmse_db(truth, estimate));
      return 0;
    }

    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
