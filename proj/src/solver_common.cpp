#include <algorithm>
#include <cmath>

#include "qrtc/solver.hpp"

namespace qrtc {

double fidelity_residual(const DenseTensor& x, const Observation& obs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (obs.mask.observed(i)) {
      const double d = x[i] - obs.values[i];
      sum += d * d;
    }
  return std::sqrt(sum);
}

bool record_is_finite(const IterationRecord& r) {
  if (!std::isfinite(r.change) || !std::isfinite(r.fidelity_residual)) return false;
  return std::all_of(r.factor_residual.begin(), r.factor_residual.end(), [](double v) { return std::isfinite(v); });
}

std::vector<std::size_t> default_ranks(const Dims& dims) {
  const std::size_t total = element_count(dims);
  std::vector<std::size_t> ranks;
  ranks.reserve(dims.size());
  for (std::size_t extent : dims) {
    const std::size_t bound = std::min(extent, total / extent);
    ranks.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(bound)))));
  }
  return ranks;
}

std::vector<double> uniform_alphas(std::size_t order) {
  return std::vector<double>(order, 1.0 / static_cast<double>(order));
}

}  // namespace qrtc
