#pragma once

// Self-calibrated reconstruction: each outer iteration perturbs the current
// estimate, trains a fresh denoiser on patch pairs cut from it, and plugs
// that denoiser into one primal-dual step. All randomness is drawn from
// streams derived from (master_seed, iteration, stream), so restarting or
// changing the thread count cannot alter the result.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "reside/grid.hpp"
#include "reside/patches.hpp"
#include "reside/pds.hpp"
#include "reside/training.hpp"

namespace reside {

struct SnrSchedule {
  enum class Mode { progressive, fixed };
  Mode mode = Mode::progressive;
  double start_db = 10.0;
  double step_db = 5.0;
  std::size_t period = 10;  // iterations per step
  double cap_db = 40.0;
  double fixed_db = 10.0;

  void validate() const {
    if (period < 1) throw std::invalid_argument("SnrSchedule: period must be >= 1");
    if (cap_db < start_db) throw std::invalid_argument("SnrSchedule: cap below start");
  }
};

// Training SNR for iteration t (1-based).
inline double snr_at(const SnrSchedule& schedule, std::size_t t) {
  schedule.validate();
  if (t < 1) throw std::invalid_argument("snr_at: t must be >= 1");
  if (schedule.mode == SnrSchedule::Mode::fixed) return schedule.fixed_db;
  const double stepped =
      schedule.start_db + schedule.step_db * static_cast<double>((t - 1) / schedule.period);
  return std::min(stepped, schedule.cap_db);
}

// sigma such that 20*log10(||x|| / (sqrt(2N) sigma)) equals the requested
// SNR; the sqrt(2N) accounts for the noise energy in both components.
inline double sigma_for_snr(const ComplexGrid& x, double snr_db) {
  const double norm = x.norm2();
  if (!(norm > 0.0)) throw std::invalid_argument("sigma_for_snr: zero image");
  const double n = static_cast<double>(x.rows() * x.cols());
  return norm / (std::sqrt(2.0 * n) * std::pow(10.0, snr_db / 20.0));
}

struct ResideConfig {
  PdsParams pds;
  SnrSchedule schedule;
  PatchPlan patches;
  TrainSpec train;
  std::size_t iterations = 70;
  std::uint64_t master_seed = 0;
  std::size_t train_every = 1;   // retrain cadence; 1 = every iteration
  bool warm_start = false;       // reuse previous weights as initialization

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("ResideConfig: iterations must be >= 1");
    if (train_every < 1) throw std::invalid_argument("ResideConfig: train_every must be >= 1");
    schedule.validate();
    train.validate();
    pds.validate();
  }
};

struct ResideTraceRecord {
  std::size_t t = 0;
  double snr_db = 0.0;
  double sigma = 0.0;
  double train_loss = 0.0;
  const ComplexGrid* x = nullptr;
};

class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

using ResideTraceSink = std::function<void(const ResideTraceRecord&)>;

inline ComplexGrid reside_reconstruct(const ForwardOperator& op, const ComplexGrid& y,
                                      const ResideConfig& cfg,
                                      const ResideTraceSink& trace = nullptr,
                                      DenoiserNet<float>* final_net = nullptr) {
  cfg.validate();
  PdsState state = pds_init(op, y, cfg.pds);

  DenoiserNet<float> net;
  bool have_net = false;
  double last_train_loss = 0.0;

  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    const double snr_db = snr_at(cfg.schedule, t);
    const double sigma = sigma_for_snr(state.x, snr_db);

    if ((t - 1) % cfg.train_every == 0 || !have_net) {
      PatchPlan plan = cfg.patches;
      plan.rng_seed = derive_seed(cfg.master_seed, t, Stream::patches);
      const std::uint64_t train_seed = derive_seed(cfg.master_seed, t, Stream::noise);
      const DenoiserNet<float>* warm = (cfg.warm_start && have_net) ? &net : nullptr;
      TrainResult<float> trained =
          train_denoiser<float>(state.x, sigma, plan, cfg.train, train_seed, warm);
      net = std::move(trained.net);
      last_train_loss = trained.final_loss;
      have_net = true;
    }

    state = pds_step(state, op, y, cfg.pds,
                     [&net](const ComplexGrid& u) { return denoise_image<float>(net, u); });

    if (!state.x.all_finite()) {
      std::ostringstream msg;
      msg << "reside_reconstruct: non-finite iterate at iteration " << t;
      throw numerical_error(msg.str(), t);
    }

    if (trace) {
      ResideTraceRecord rec;
      rec.t = t;
      rec.snr_db = snr_db;
      rec.sigma = sigma;
      rec.train_loss = last_train_loss;
      rec.x = &state.x;
      trace(rec);
    }
  }
  if (final_net != nullptr && have_net) *final_net = net;
  return state.x;
}

}  // namespace reside
