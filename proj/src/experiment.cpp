#include "qrtc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "qrtc/errors.hpp"
#include "qrtc/io.hpp"
#include "qrtc/svt_baseline.hpp"
#include "qrtc/tlnm.hpp"
#include "qrtc/tlnmtv.hpp"

namespace qrtc {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t resolve_band_mode(std::size_t band_mode, std::size_t order) {
  const std::size_t resolved = band_mode == 0 ? order : band_mode;
  if (resolved > order) throw ArgumentError("band mode " + std::to_string(band_mode) + " exceeds tensor order");
  return resolved;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_trace(const std::filesystem::path& path, const SolverReport& report, std::size_t order) {
  std::string text = "iteration,change,fidelity_residual";
  for (std::size_t n = 1; n <= order; ++n) text += ",factor_residual_" + std::to_string(n);
  text += '\n';
  for (std::size_t k = 0; k < report.history.size(); ++k) {
    const IterationRecord& r = report.history[k];
    text += std::to_string(k + 1) + ',' + format_number(r.change) + ',' + format_number(r.fidelity_residual);
    for (double f : r.factor_residual) text += ',' + format_number(f);
    text += '\n';
  }
  write_text(path, text);
}

template <typename Config>
void apply_common(Config& c, const SolverOverrides& o) {
  if (o.alphas) c.alphas = *o.alphas;
  if (o.rho) c.rho = *o.rho;
  if (o.eps) c.eps = *o.eps;
  if (o.max_iters) c.max_iters = *o.max_iters;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "tlnm") return Method::tlnm;
  if (name == "tlnmtv") return Method::tlnmtv;
  if (name == "svt-baseline") return Method::svt_baseline;
  throw ArgumentError("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::tlnm: return "tlnm";
    case Method::tlnmtv: return "tlnmtv";
    case Method::svt_baseline: return "svt-baseline";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) throw ArgumentError("sampling rate must lie in (0, 1]");
  if (input_path.empty()) throw ArgumentError("input path is required");
  if (output_dir.empty()) throw ArgumentError("output directory is required");
}

double normalization_peak(const DenseTensor& truth) {
  double peak = 0.0;
  for (double v : truth.data()) peak = std::max(peak, std::abs(v));
  return peak > 1.0 ? peak : 1.0;
}

QualityRecord evaluate_normalized(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode) {
  const double scale = 1.0 / normalization_peak(ref);
  return evaluate(scale * ref, scale * est, resolve_band_mode(band_mode, ref.order()));
}

SolveResult run_method(Method method, const Observation& obs, const SolverOverrides& o, std::size_t band_mode) {
  const Dims& dims = obs.values.dims();
  switch (method) {
    case Method::tlnm: {
      TlnmConfig c = TlnmConfig::defaults(dims);
      apply_common(c, o);
      if (o.ranks) c.ranks = *o.ranks;
      if (o.mu0) c.mu0 = *o.mu0;
      return solve_tlnm(obs, c);
    }
    case Method::tlnmtv: {
      TlnmTvConfig c = TlnmTvConfig::defaults(dims);
      apply_common(c, o);
      if (o.ranks) c.ranks = *o.ranks;
      if (o.mus) c.mus = *o.mus;
      if (o.lambda) c.lambda = *o.lambda;
      if (o.betas) {
        c.betas = *o.betas;
      } else {
        // Smooth along every mode except the band (spectral/temporal) mode.
        const std::size_t bands = resolve_band_mode(band_mode, dims.size());
        for (std::size_t n = 0; n < dims.size(); ++n) c.betas[n] = (n + 1 != bands && dims[n] >= 2) ? 1 : 0;
      }
      return solve_tlnmtv(obs, c);
    }
    case Method::svt_baseline: {
      SvtBaselineConfig c = SvtBaselineConfig::defaults(dims);
      apply_common(c, o);
      if (o.mu0) c.mu0 = *o.mu0;
      return solve_svt_baseline(obs, c);
    }
  }
  throw ArgumentError("unknown method");
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const DenseTensor truth = load_tensor(spec.input_path);
  const Dims& dims = truth.dims();
  const std::size_t band_mode = resolve_band_mode(spec.band_mode, dims.size());

  Mask mask = spec.mask_path ? load_mask(*spec.mask_path)
                             : generate_mask(dims, spec.sampling_rate, spec.seed, spec.mask_mode, band_mode);
  if (mask.dims() != dims) throw ArgumentError("mask dimensions differ from the input tensor");

  std::filesystem::create_directories(spec.output_dir);
  save_mask(mask, spec.output_dir / "mask.dten");

  const double peak = normalization_peak(truth);
  const DenseTensor scaled_truth = (1.0 / peak) * truth;
  const Observation obs = Observation::sample(scaled_truth, mask);

  SolveResult result;
  try {
    result = run_method(spec.method, obs, spec.overrides, band_mode);
  } catch (const DivergenceError& e) {
    write_trace(spec.output_dir / "trace.csv", e.report(), dims.size());
    throw;
  }
  write_trace(spec.output_dir / "trace.csv", result.report, dims.size());

  DenseTensor completed = result.completed;
  for (std::size_t i = 0; i < completed.size(); ++i)
    if (mask.observed(i)) completed[i] = scaled_truth[i];

  ExperimentOutcome outcome;
  outcome.report = result.report;
  outcome.quality = evaluate(scaled_truth, completed, band_mode);
  outcome.quality.wall_time = result.report.wall_time;

  DenseTensor output = peak * completed;
  for (std::size_t i = 0; i < output.size(); ++i)
    if (mask.observed(i)) output[i] = truth[i];
  save_tensor(output, spec.output_dir / "completed.dten");

  std::string csv(kResultsHeader);
  csv += std::string(method_name(spec.method)) + ',' + format_number(spec.sampling_rate) + ',' +
         std::to_string(spec.seed) + ',' + format_number(outcome.quality.mpsnr) + ',' +
         format_number(outcome.quality.mssim) + ',' + format_number(outcome.quality.ergas) + ',' +
         std::to_string(result.report.iterations) + ',' + format_number(outcome.quality.wall_time) + '\n';
  write_text(spec.output_dir / "results.csv", csv);

  if (spec.export_pgm) {
    const auto dir = spec.output_dir / "pgm";
    std::filesystem::create_directories(dir);
    for (std::size_t b = 1; b <= dims[band_mode - 1]; ++b) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_%03zu.pgm", b);
      export_slice_pgm(scaled_truth, band_mode, b, dir / ("truth" + std::string(suffix)));
      export_slice_pgm(obs.values, band_mode, b, dir / ("observed" + std::string(suffix)));
      export_slice_pgm(completed, band_mode, b, dir / ("completed" + std::string(suffix)));
    }
  }
  return outcome;
}

}  // namespace qrtc
