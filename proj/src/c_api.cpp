#include "qrtc/qrtc.h"

#include <algorithm>
#include <array>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "qrtc/errors.hpp"
#include "qrtc/experiment.hpp"
#include "qrtc/io.hpp"
#include "qrtc/sampling.hpp"
#include "qrtc/tensor.hpp"

struct qrtc_tensor {
  qrtc::DenseTensor value;
};
struct qrtc_mask {
  qrtc::Mask value;
};
struct qrtc_config {
  qrtc::Method method = qrtc::Method::tlnm;
  qrtc::SolverOverrides overrides;
  std::size_t band_mode = 0;
};
struct qrtc_report {
  qrtc::SolverReport value;
};
struct qrtc_experiment {
  qrtc::ExperimentSpec spec;
};

namespace {

thread_local std::string last_error;

qrtc_status fail(qrtc_status status, const char* message) {
  last_error = message;
  return status;
}

qrtc_status format_status(qrtc::FormatErrorKind kind) {
  switch (kind) {
    case qrtc::FormatErrorKind::truncated: return QRTC_ERR_TRUNCATED;
    case qrtc::FormatErrorKind::unsupported_version: return QRTC_ERR_VERSION;
    case qrtc::FormatErrorKind::type_mismatch: return QRTC_ERR_TYPE;
    default: return QRTC_ERR_FORMAT;
  }
}

// Runs `body`, translating exceptions into status codes. The divergence
// handler lets callers salvage the partial report.
template <typename Body, typename OnDivergence>
qrtc_status guarded(Body&& body, OnDivergence&& on_divergence) {
  try {
    last_error.clear();
    body();
    return QRTC_OK;
  } catch (const qrtc::ArgumentError& e) {
    return fail(QRTC_ERR_ARGUMENT, e.what());
  } catch (const qrtc::FormatError& e) {
    return fail(format_status(e.kind()), e.what());
  } catch (const qrtc::IoError& e) {
    return fail(QRTC_ERR_IO, e.what());
  } catch (const qrtc::DivergenceError& e) {
    on_divergence(e);
    return fail(QRTC_ERR_DIVERGENCE, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(QRTC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QRTC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QRTC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QRTC_ERR_INTERNAL, "unknown error");
  }
}

template <typename Body>
qrtc_status guarded(Body&& body) {
  return guarded(std::forward<Body>(body), [](const qrtc::DivergenceError&) {});
}

void require(bool condition, const char* message) {
  if (!condition) throw qrtc::ArgumentError(message);
}

qrtc::Dims make_dims(const size_t* dims, size_t ndim) {
  require(dims != nullptr && ndim > 0, "dims must be a non-empty array");
  return qrtc::Dims(dims, dims + ndim);
}

}  // namespace

extern "C" {

const char* qrtc_last_error(void) { return last_error.c_str(); }

const char* qrtc_status_name(qrtc_status status) {
  switch (status) {
    case QRTC_OK: return "ok";
    case QRTC_ERR_INTERNAL: return "internal error";
    case QRTC_ERR_ARGUMENT: return "argument error";
    case QRTC_ERR_FORMAT: return "format error";
    case QRTC_ERR_DIVERGENCE: return "solver divergence";
    case QRTC_ERR_IO: return "i/o error";
    case QRTC_ERR_TRUNCATED: return "truncated file";
    case QRTC_ERR_VERSION: return "unsupported version";
    case QRTC_ERR_TYPE: return "element type mismatch";
  }
  return "unknown status";
}

const char* qrtc_version(void) { return "0.1.0"; }

qrtc_status qrtc_tensor_create(const size_t* dims, size_t ndim, const double* data, qrtc_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    qrtc::Dims d = make_dims(dims, ndim);
    const std::size_t n = qrtc::element_count(d);
    std::vector<double> values = data ? std::vector<double>(data, data + n) : std::vector<double>(n, 0.0);
    *out = new qrtc_tensor{qrtc::DenseTensor(std::move(d), std::move(values))};
  });
}

qrtc_status qrtc_tensor_load(const char* path, qrtc_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new qrtc_tensor{qrtc::load_tensor(path)};
  });
}

qrtc_status qrtc_tensor_save(const qrtc_tensor* t, const char* path) {
  return guarded([&] {
    require(t != nullptr && path != nullptr, "null argument");
    qrtc::save_tensor(t->value, path);
  });
}

void qrtc_tensor_free(qrtc_tensor* t) { delete t; }
size_t qrtc_tensor_ndim(const qrtc_tensor* t) { return t ? t->value.order() : 0; }
size_t qrtc_tensor_size(const qrtc_tensor* t) { return t ? t->value.size() : 0; }

size_t qrtc_tensor_dims(const qrtc_tensor* t, size_t* dims, size_t capacity) {
  if (!t) return 0;
  const auto& d = t->value.dims();
  const std::size_t n = std::min(capacity, d.size());
  for (std::size_t i = 0; i < n && dims; ++i) dims[i] = d[i];
  return d.size();
}

const double* qrtc_tensor_data(const qrtc_tensor* t) { return t ? t->value.data().data() : nullptr; }

qrtc_status qrtc_tensor_export_pgm(const qrtc_tensor* t, size_t band_mode, size_t band_index, const char* path) {
  return guarded([&] {
    require(t != nullptr && path != nullptr, "null argument");
    qrtc::export_slice_pgm(t->value, band_mode, band_index, path);
  });
}

qrtc_status qrtc_tensor_from_bands(const char* const* files, size_t count, size_t width, size_t height,
                                   qrtc_raw_type raw_type, qrtc_tensor** out) {
  return guarded([&] {
    require(files != nullptr && out != nullptr, "null argument");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < count; ++i) {
      require(files[i] != nullptr, "null band path");
      paths.emplace_back(files[i]);
    }
    qrtc::BandStackOptions options{width, height,
                                   raw_type == QRTC_RAW_FLOAT64 ? qrtc::RawType::float64 : qrtc::RawType::float32};
    *out = new qrtc_tensor{qrtc::stack_bands(paths, options)};
  });
}

qrtc_status qrtc_file_element_type(const char* path, qrtc_element_type* out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = qrtc::peek_element_type(path) == qrtc::ElementType::mask8 ? QRTC_ELEMENT_MASK8 : QRTC_ELEMENT_FLOAT64;
  });
}

qrtc_status qrtc_mask_generate(const size_t* dims, size_t ndim, double sampling_rate, uint64_t seed,
                               qrtc_mask_mode mode, size_t band_mode, qrtc_mask** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    const qrtc::Dims d = make_dims(dims, ndim);
    const std::size_t bands = band_mode == 0 ? d.size() : band_mode;
    const auto m = mode == QRTC_MASK_PIXEL ? qrtc::MaskMode::pixel : qrtc::MaskMode::element;
    *out = new qrtc_mask{qrtc::generate_mask(d, sampling_rate, seed, m, bands)};
  });
}

qrtc_status qrtc_mask_load(const char* path, qrtc_mask** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new qrtc_mask{qrtc::load_mask(path)};
  });
}

qrtc_status qrtc_mask_save(const qrtc_mask* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    qrtc::save_mask(m->value, path);
  });
}

void qrtc_mask_free(qrtc_mask* m) { delete m; }
size_t qrtc_mask_count(const qrtc_mask* m) { return m ? m->value.count() : 0; }
size_t qrtc_mask_size(const qrtc_mask* m) { return m ? m->value.bits().size() : 0; }
const uint8_t* qrtc_mask_data(const qrtc_mask* m) { return m ? m->value.bits().data() : nullptr; }

qrtc_status qrtc_config_create(const char* method, qrtc_config** out) {
  return guarded([&] {
    require(method != nullptr && out != nullptr, "null argument");
    *out = new qrtc_config{qrtc::parse_method(method), {}, 0};
  });
}

void qrtc_config_free(qrtc_config* c) { delete c; }

qrtc_status qrtc_config_set_alphas(qrtc_config* c, const double* alphas, size_t n) {
  return guarded([&] {
    require(c != nullptr && alphas != nullptr, "null argument");
    c->overrides.alphas = std::vector<double>(alphas, alphas + n);
  });
}

qrtc_status qrtc_config_set_ranks(qrtc_config* c, const size_t* ranks, size_t n) {
  return guarded([&] {
    require(c != nullptr && ranks != nullptr, "null argument");
    c->overrides.ranks = std::vector<std::size_t>(ranks, ranks + n);
  });
}

qrtc_status qrtc_config_set_betas(qrtc_config* c, const int* betas, size_t n) {
  return guarded([&] {
    require(c != nullptr && betas != nullptr, "null argument");
    c->overrides.betas = std::vector<int>(betas, betas + n);
  });
}

qrtc_status qrtc_config_set_mu0(qrtc_config* c, double mu0) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->overrides.mu0 = mu0;
  });
}

qrtc_status qrtc_config_set_mus(qrtc_config* c, const double mus[5]) {
  return guarded([&] {
    require(c != nullptr && mus != nullptr, "null argument");
    c->overrides.mus = std::array<double, 5>{mus[0], mus[1], mus[2], mus[3], mus[4]};
  });
}

qrtc_status qrtc_config_set_rho(qrtc_config* c, double rho) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->overrides.rho = rho;
  });
}

qrtc_status qrtc_config_set_eps(qrtc_config* c, double eps) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->overrides.eps = eps;
  });
}

qrtc_status qrtc_config_set_max_iters(qrtc_config* c, size_t max_iters) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->overrides.max_iters = max_iters;
  });
}

qrtc_status qrtc_config_set_lambda(qrtc_config* c, double lambda) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->overrides.lambda = lambda;
  });
}

qrtc_status qrtc_config_set_band_mode(qrtc_config* c, size_t band_mode) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->band_mode = band_mode;
  });
}

qrtc_status qrtc_solve(const qrtc_config* c, const qrtc_tensor* observed, const qrtc_mask* mask,
                       qrtc_tensor** completed, qrtc_report** report) {
  if (completed) *completed = nullptr;
  if (report) *report = nullptr;
  return guarded(
      [&] {
        require(c != nullptr && observed != nullptr && mask != nullptr && completed != nullptr, "null argument");
        const qrtc::Observation obs(observed->value, mask->value);
        qrtc::SolveResult result = qrtc::run_method(c->method, obs, c->overrides, c->band_mode);
        *completed = new qrtc_tensor{std::move(result.completed)};
        if (report) *report = new qrtc_report{std::move(result.report)};
      },
      [&](const qrtc::DivergenceError& e) {
        if (report) *report = new qrtc_report{e.report()};
      });
}

void qrtc_report_free(qrtc_report* r) { delete r; }
size_t qrtc_report_iterations(const qrtc_report* r) { return r ? r->value.iterations : 0; }
int qrtc_report_converged(const qrtc_report* r) { return r && r->value.converged ? 1 : 0; }
double qrtc_report_wall_time(const qrtc_report* r) { return r ? r->value.wall_time : 0.0; }
size_t qrtc_report_history_length(const qrtc_report* r) { return r ? r->value.history.size() : 0; }

qrtc_status qrtc_report_record(const qrtc_report* r, size_t index, double* change, double* fidelity_residual) {
  return guarded([&] {
    require(r != nullptr, "null report");
    require(index < r->value.history.size(), "record index out of range");
    const auto& rec = r->value.history[index];
    if (change) *change = rec.change;
    if (fidelity_residual) *fidelity_residual = rec.fidelity_residual;
  });
}

qrtc_status qrtc_report_factor_residuals(const qrtc_report* r, size_t index, double* out, size_t capacity,
                                         size_t* count) {
  return guarded([&] {
    require(r != nullptr, "null report");
    require(index < r->value.history.size(), "record index out of range");
    const auto& f = r->value.history[index].factor_residual;
    for (std::size_t i = 0; i < f.size() && i < capacity && out; ++i) out[i] = f[i];
    if (count) *count = f.size();
  });
}

qrtc_status qrtc_evaluate(const qrtc_tensor* reference, const qrtc_tensor* estimate, size_t band_mode,
                          qrtc_quality* out) {
  return guarded([&] {
    require(reference != nullptr && estimate != nullptr && out != nullptr, "null argument");
    const qrtc::QualityRecord q = qrtc::evaluate_normalized(reference->value, estimate->value, band_mode);
    *out = qrtc_quality{q.mpsnr, q.mssim, q.ergas, q.wall_time};
  });
}

qrtc_status qrtc_experiment_create(qrtc_experiment** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new qrtc_experiment{};
  });
}

void qrtc_experiment_free(qrtc_experiment* e) { delete e; }

qrtc_status qrtc_experiment_set_input(qrtc_experiment* e, const char* path) {
  return guarded([&] {
    require(e != nullptr && path != nullptr, "null argument");
    e->spec.input_path = path;
  });
}

qrtc_status qrtc_experiment_set_output_dir(qrtc_experiment* e, const char* path) {
  return guarded([&] {
    require(e != nullptr && path != nullptr, "null argument");
    e->spec.output_dir = path;
  });
}

qrtc_status qrtc_experiment_set_config(qrtc_experiment* e, const qrtc_config* c) {
  return guarded([&] {
    require(e != nullptr && c != nullptr, "null argument");
    e->spec.method = c->method;
    e->spec.overrides = c->overrides;
    e->spec.band_mode = c->band_mode;
  });
}

qrtc_status qrtc_experiment_set_sampling_rate(qrtc_experiment* e, double sr) {
  return guarded([&] {
    require(e != nullptr, "null experiment");
    require(sr > 0.0 && sr <= 1.0, "sampling rate must lie in (0, 1]");
    e->spec.sampling_rate = sr;
  });
}

qrtc_status qrtc_experiment_set_seed(qrtc_experiment* e, uint64_t seed) {
  return guarded([&] {
    require(e != nullptr, "null experiment");
    e->spec.seed = seed;
  });
}

qrtc_status qrtc_experiment_set_mask_mode(qrtc_experiment* e, qrtc_mask_mode mode) {
  return guarded([&] {
    require(e != nullptr, "null experiment");
    require(mode == QRTC_MASK_ELEMENT || mode == QRTC_MASK_PIXEL, "unknown mask mode");
    e->spec.mask_mode = mode == QRTC_MASK_PIXEL ? qrtc::MaskMode::pixel : qrtc::MaskMode::element;
  });
}

qrtc_status qrtc_experiment_set_mask_path(qrtc_experiment* e, const char* path) {
  return guarded([&] {
    require(e != nullptr, "null experiment");
    if (path)
      e->spec.mask_path = std::filesystem::path(path);
    else
      e->spec.mask_path.reset();
  });
}

qrtc_status qrtc_experiment_set_export_pgm(qrtc_experiment* e, int enabled) {
  return guarded([&] {
    require(e != nullptr, "null experiment");
    e->spec.export_pgm = enabled != 0;
  });
}

qrtc_status qrtc_experiment_run(const qrtc_experiment* e, qrtc_quality* quality, qrtc_report** report) {
  if (report) *report = nullptr;
  return guarded(
      [&] {
        require(e != nullptr, "null experiment");
        const qrtc::ExperimentOutcome outcome = qrtc::run_experiment(e->spec);
        if (quality)
          *quality = qrtc_quality{outcome.quality.mpsnr, outcome.quality.mssim, outcome.quality.ergas,
                                  outcome.quality.wall_time};
        if (report) *report = new qrtc_report{outcome.report};
      },
      [&](const qrtc::DivergenceError& e) {
        if (report) *report = new qrtc_report{e.report()};
      });
}

}  // extern "C"
