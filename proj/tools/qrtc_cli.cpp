// Command-line front end. Talks to the library only through the C API.
#include <qrtc/qrtc.h>

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode { kSuccess = 0, kInternal = 1, kArgument = 2, kFormat = 3, kDivergence = 4 };

int exit_code(qrtc_status s) {
  switch (s) {
    case QRTC_OK: return kSuccess;
    case QRTC_ERR_ARGUMENT:
    case QRTC_ERR_IO: return kArgument;
    case QRTC_ERR_FORMAT:
    case QRTC_ERR_TRUNCATED:
    case QRTC_ERR_VERSION:
    case QRTC_ERR_TYPE: return kFormat;
    case QRTC_ERR_DIVERGENCE: return kDivergence;
    default: return kInternal;
  }
}

struct Failure {
  qrtc_status status;
};

void check(qrtc_status s) {
  if (s != QRTC_OK) throw Failure{s};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Tensor = std::unique_ptr<qrtc_tensor, Deleter<qrtc_tensor, qrtc_tensor_free>>;
using MaskPtr = std::unique_ptr<qrtc_mask, Deleter<qrtc_mask, qrtc_mask_free>>;
using Config = std::unique_ptr<qrtc_config, Deleter<qrtc_config, qrtc_config_free>>;
using Report = std::unique_ptr<qrtc_report, Deleter<qrtc_report, qrtc_report_free>>;
using Experiment = std::unique_ptr<qrtc_experiment, Deleter<qrtc_experiment, qrtc_experiment_free>>;

Tensor load(const std::string& path) {
  qrtc_tensor* t = nullptr;
  check(qrtc_tensor_load(path.c_str(), &t));
  return Tensor(t);
}

std::vector<size_t> dims_of(const qrtc_tensor* t) {
  std::vector<size_t> dims(qrtc_tensor_ndim(t));
  qrtc_tensor_dims(t, dims.data(), dims.size());
  return dims;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::map<std::string, qrtc_mask_mode> kMaskModes{{"element", QRTC_MASK_ELEMENT}, {"pixel", QRTC_MASK_PIXEL}};

struct SolverFlags {
  std::vector<double> alphas;
  std::vector<size_t> ranks;
  std::vector<int> betas;
  std::vector<double> mus;
  std::optional<double> mu0, rho, eps, lambda;
  std::optional<size_t> max_iters;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alphas", alphas, "Per-mode weights summing to 1 (default 1/N each)")->delimiter(',');
    cmd->add_option("--ranks", ranks, "Per-mode factor ranks (default ceil(0.1*min(I_n, t_n)))")->delimiter(',');
    cmd->add_option("--betas", betas, "tlnmtv: per-mode TV flags 0/1 (default 1 except the band mode)")
        ->delimiter(',');
    cmd->add_option("--mus", mus, "tlnmtv: five penalties mu1..mu5 (default 1e-4 each)")->delimiter(',')->expected(5);
    cmd->add_option("--mu0", mu0, "tlnm/svt-baseline: initial penalty (default 1e-4)");
    cmd->add_option("--rho", rho, "Penalty growth factor (default 1.05)");
    cmd->add_option("--eps", eps, "Stop when max |X_k+1 - X_k| <= eps (default 1e-5)");
    cmd->add_option("--lambda", lambda, "tlnmtv: TV weight (default 1)");
    cmd->add_option("--max-iters", max_iters, "Iteration cap K (default 500)");
  }

  Config make(const std::string& method, size_t band_mode) const {
    qrtc_config* raw = nullptr;
    check(qrtc_config_create(method.c_str(), &raw));
    Config c(raw);
    if (!alphas.empty()) check(qrtc_config_set_alphas(raw, alphas.data(), alphas.size()));
    if (!ranks.empty()) check(qrtc_config_set_ranks(raw, ranks.data(), ranks.size()));
    if (!betas.empty()) check(qrtc_config_set_betas(raw, betas.data(), betas.size()));
    if (!mus.empty()) check(qrtc_config_set_mus(raw, mus.data()));
    if (mu0) check(qrtc_config_set_mu0(raw, *mu0));
    if (rho) check(qrtc_config_set_rho(raw, *rho));
    if (eps) check(qrtc_config_set_eps(raw, *eps));
    if (lambda) check(qrtc_config_set_lambda(raw, *lambda));
    if (max_iters) check(qrtc_config_set_max_iters(raw, *max_iters));
    check(qrtc_config_set_band_mode(raw, band_mode));
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor completion with QR-factorised L2,1-norm solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qrtc_version()));

  // complete
  auto* complete = app.add_subcommand("complete", "Sample a ground-truth tensor, complete it and score it");
  std::string input_path, output_dir, method = "tlnm", mask_mode = "element", mask_path;
  double sampling_rate = 0.1;
  uint64_t seed = 0;
  size_t band_mode = 0;
  bool export_pgm = false;
  SolverFlags solver;
  complete->add_option("--input-path,--input", input_path, "Ground truth DTEN1 tensor")->required();
  complete->add_option("--output-dir", output_dir, "Directory for completed.dten, mask.dten and CSVs")->required();
  complete->add_option("--method", method, "tlnm, tlnmtv or svt-baseline")
      ->check(CLI::IsMember({"tlnm", "tlnmtv", "svt-baseline"}))
      ->capture_default_str();
  complete->add_option("--sampling-rate", sampling_rate, "Observed fraction SR in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  complete->add_option("--seed", seed, "Mask seed")->capture_default_str();
  complete->add_option("--band-mode", band_mode, "Band (spectral/temporal) mode, 0 = last")->capture_default_str();
  complete->add_option("--mask-mode", mask_mode, "element or pixel (all bands of a pixel together)")
      ->check(CLI::IsMember({"element", "pixel"}))
      ->capture_default_str();
  complete->add_option("--mask-path", mask_path, "Use this DTEN1 mask instead of sampling");
  complete->add_flag("--export-pgm", export_pgm, "Write truth/observed/completed band images under pgm/");
  solver.add_to(complete);

  // mask
  auto* mask = app.add_subcommand("mask", "Generate a sampling mask");
  std::vector<size_t> mask_dims;
  std::string like_path, mask_output;
  auto* dims_opt = mask->add_option("--dims", mask_dims, "Extents, comma separated")->delimiter(',');
  auto* like_opt = mask->add_option("--like", like_path, "Take extents from this DTEN1 tensor");
  dims_opt->excludes(like_opt);
  mask->add_option("--sampling-rate", sampling_rate, "Observed fraction SR in (0, 1]")->required();
  mask->add_option("--seed", seed, "Seed")->capture_default_str();
  mask->add_option("--mask-mode", mask_mode, "element or pixel")
      ->check(CLI::IsMember({"element", "pixel"}))
      ->capture_default_str();
  mask->add_option("--band-mode", band_mode, "Band mode for pixel masks, 0 = last")->capture_default_str();
  mask->add_option("--output,-o", mask_output, "Output DTEN1 mask")->required();

  // convert
  auto* convert = app.add_subcommand("convert", "Stack PGM or raw float band files into a DTEN1 tensor");
  std::vector<std::string> band_files;
  std::string convert_output, raw_type = "float32";
  size_t width = 0, height = 0;
  convert->add_option("bands", band_files, "Band files in order (.pgm or raw)")->required();
  convert->add_option("--width", width, "Raw band width");
  convert->add_option("--height", height, "Raw band height");
  convert->add_option("--raw-type", raw_type, "float32 or float64 (raw files are little-endian, row-major)")
      ->check(CLI::IsMember({"float32", "float64"}))
      ->capture_default_str();
  convert->add_option("--output,-o", convert_output, "Output DTEN1 tensor")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "MPSNR, MSSIM and ERGAS between two tensors");
  std::string reference_path, estimate_path;
  metrics->add_option("--reference", reference_path, "Ground truth DTEN1 tensor")->required();
  metrics->add_option("--estimate", estimate_path, "Estimate DTEN1 tensor")->required();
  metrics->add_option("--band-mode", band_mode, "Band mode, 0 = last")->capture_default_str();

  // export
  auto* exporter = app.add_subcommand("export", "Write bands of a tensor as 8-bit PGM images");
  std::string export_input, export_output;
  size_t band_index = 0;
  exporter->add_option("--input", export_input, "DTEN1 tensor with values in [0, 1]")->required();
  exporter->add_option("--band-mode", band_mode, "Band mode, 0 = last")->capture_default_str();
  exporter->add_option("--band-index", band_index, "1-based band; 0 writes every band")->capture_default_str();
  exporter->add_option("--output,-o", export_output, "PGM file for one band, directory for all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kArgument;
  }

  try {
    if (*complete) {
      Config config = solver.make(method, band_mode);
      qrtc_experiment* raw = nullptr;
      check(qrtc_experiment_create(&raw));
      Experiment exp(raw);
      check(qrtc_experiment_set_input(raw, input_path.c_str()));
      check(qrtc_experiment_set_output_dir(raw, output_dir.c_str()));
      check(qrtc_experiment_set_config(raw, config.get()));
      check(qrtc_experiment_set_sampling_rate(raw, sampling_rate));
      check(qrtc_experiment_set_seed(raw, seed));
      check(qrtc_experiment_set_mask_mode(raw, kMaskModes.at(mask_mode)));
      if (!mask_path.empty()) check(qrtc_experiment_set_mask_path(raw, mask_path.c_str()));
      check(qrtc_experiment_set_export_pgm(raw, export_pgm ? 1 : 0));
      qrtc_quality q{};
      qrtc_report* report_raw = nullptr;
      const qrtc_status s = qrtc_experiment_run(raw, &q, &report_raw);
      Report report(report_raw);
      if (s == QRTC_ERR_DIVERGENCE)
        std::fprintf(stderr, "partial trace (%zu iterations) written to %s/trace.csv\n",
                     qrtc_report_history_length(report.get()), output_dir.c_str());
      check(s);
      std::printf("method,sampling_rate,seed,mpsnr,mssim,ergas,iterations,converged,wall_time\n");
      std::printf("%s,%s,%llu,%s,%s,%s,%zu,%d,%s\n", method.c_str(), number(sampling_rate).c_str(),
                  static_cast<unsigned long long>(seed), number(q.mpsnr).c_str(), number(q.mssim).c_str(),
                  number(q.ergas).c_str(), qrtc_report_iterations(report.get()),
                  qrtc_report_converged(report.get()), number(q.wall_time).c_str());
    } else if (*mask) {
      if (!like_path.empty()) mask_dims = dims_of(load(like_path).get());
      if (mask_dims.empty()) throw CLI::ValidationError("mask", "one of --dims or --like is required");
      qrtc_mask* raw = nullptr;
      check(qrtc_mask_generate(mask_dims.data(), mask_dims.size(), sampling_rate, seed, kMaskModes.at(mask_mode),
                               band_mode, &raw));
      MaskPtr m(raw);
      check(qrtc_mask_save(raw, mask_output.c_str()));
      std::printf("%zu of %zu entries observed\n", qrtc_mask_count(raw), qrtc_mask_size(raw));
    } else if (*convert) {
      std::vector<const char*> files;
      for (const auto& f : band_files) files.push_back(f.c_str());
      qrtc_tensor* raw = nullptr;
      check(qrtc_tensor_from_bands(files.data(), files.size(), width, height,
                                   raw_type == "float64" ? QRTC_RAW_FLOAT64 : QRTC_RAW_FLOAT32, &raw));
      Tensor t(raw);
      check(qrtc_tensor_save(raw, convert_output.c_str()));
      const auto dims = dims_of(raw);
      std::printf("wrote %zux%zux%zu tensor\n", dims[0], dims[1], dims[2]);
    } else if (*metrics) {
      Tensor ref = load(reference_path);
      Tensor est = load(estimate_path);
      qrtc_quality q{};
      check(qrtc_evaluate(ref.get(), est.get(), band_mode, &q));
      std::printf("mpsnr,mssim,ergas\n%s,%s,%s\n", number(q.mpsnr).c_str(), number(q.mssim).c_str(),
                  number(q.ergas).c_str());
    } else if (*exporter) {
      Tensor t = load(export_input);
      const auto dims = dims_of(t.get());
      const size_t mode = band_mode == 0 ? dims.size() : band_mode;
      if (band_index != 0) {
        check(qrtc_tensor_export_pgm(t.get(), mode, band_index, export_output.c_str()));
      } else {
        if (mode > dims.size()) throw CLI::ValidationError("--band-mode", "exceeds tensor order");
        std::filesystem::create_directories(export_output);
        for (size_t b = 1; b <= dims[mode - 1]; ++b) {
          char name[32];
          std::snprintf(name, sizeof name, "band_%03zu.pgm", b);
          check(qrtc_tensor_export_pgm(t.get(), mode, b, (std::filesystem::path(export_output) / name).c_str()));
        }
      }
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", qrtc_status_name(f.status), qrtc_last_error());
    return exit_code(f.status);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kArgument;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kSuccess;
}
