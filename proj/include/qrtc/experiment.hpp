#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrtc/metrics.hpp"
#include "qrtc/sampling.hpp"
#include "qrtc/solver.hpp"
#include "qrtc/tensor.hpp"

namespace qrtc {

enum class Method { tlnm, tlnmtv, svt_baseline };

Method parse_method(std::string_view name);  // "tlnm", "tlnmtv", "svt-baseline"
std::string_view method_name(Method m);

// Unset fields keep the solver's defaults. `mu0` applies to TLNM and the
// baseline, `mus` to TLNMTV; `lambda` and `betas` only to TLNMTV.
struct SolverOverrides {
  std::optional<std::vector<double>> alphas;
  std::optional<std::vector<std::size_t>> ranks;
  std::optional<double> mu0;
  std::optional<std::array<double, 5>> mus;
  std::optional<double> rho;
  std::optional<double> eps;
  std::optional<std::size_t> max_iters;
  std::optional<double> lambda;
  std::optional<std::vector<int>> betas;
};

struct ExperimentSpec {
  std::filesystem::path input_path;
  Method method = Method::tlnm;
  double sampling_rate = 0.1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t band_mode = 0;  // 0 selects the last mode
  MaskMode mask_mode = MaskMode::element;
  std::optional<std::filesystem::path> mask_path;  // overrides generation
  bool export_pgm = false;
  SolverOverrides overrides;

  void validate() const;
};

struct ExperimentOutcome {
  QualityRecord quality;
  SolverReport report;
};

/// Peak used to bring data into [0, 1] for solving and scoring:
/// max |entry| when that exceeds 1, otherwise 1.
double normalization_peak(const DenseTensor& truth);

/// evaluate() after dividing both tensors by normalization_peak(ref).
QualityRecord evaluate_normalized(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode);

/// Completes a single tensor with the chosen method. Exposed so callers that
/// already hold an observation can skip the file round trip.
SolveResult run_method(Method method, const Observation& obs, const SolverOverrides& overrides,
                       std::size_t band_mode);

/// Loads the ground truth, samples it, completes it and writes into
/// output_dir:
///   completed.dten  completion in the input's scale, observed entries kept
///   mask.dten       the mask used
///   results.csv     one result row under a versioned header
///   trace.csv       per-iteration residuals
///   pgm/            truth, observed and completed bands when export_pgm
/// On divergence trace.csv is still written and DivergenceError propagates.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

inline constexpr std::string_view kResultsHeader =
    "# qrtc results v1\nmethod,sampling_rate,seed,mpsnr,mssim,ergas,iterations,wall_time\n";

}  // namespace qrtc
