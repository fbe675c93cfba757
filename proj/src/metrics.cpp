#include "km/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace km {

namespace {

void check_same_dim(const SimplexVector& theta, const IndicatorVector& psi) {
  if (theta.dim() != psi.dim()) {
    throw std::invalid_argument("dimension mismatch: theta has " +
                                std::to_string(theta.dim()) + ", psi has " +
                                std::to_string(psi.dim()));
  }
}

}  // namespace

double km_probability(const SimplexVector& theta, const IndicatorVector& psi) {
  check_same_dim(theta, psi);
  double p = 0.0;
  for (int i = 0; i < theta.dim(); ++i) {
    if (psi.bit(i)) p += theta[i];
  }
  return p;
}

double km_complement(const SimplexVector& theta, const IndicatorVector& psi) {
  check_same_dim(theta, psi);
  double p = 0.0;
  for (int i = 0; i < theta.dim(); ++i) {
    if (!psi.bit(i)) p += theta[i];
  }
  return p;
}

double empirical_probability(double rating, double r_max) {
  if (r_max <= 0.0) {
    throw std::invalid_argument("r_max must be positive");
  }
  if (rating < 0.0 || rating > r_max) {
    throw std::invalid_argument("rating " + std::to_string(rating) +
                                " outside [0, " + std::to_string(r_max) + "]");
  }
  return rating / r_max;
}

namespace {

double split_rmse(const KmParams& params, const RatingDataset& data,
                  Split split, int* skipped) {
  double sq = 0.0;
  size_t n = 0;
  int skip = 0;
  for (const auto& t : data.triples()) {
    if (t.split != split) continue;
    auto th = params.theta.find(t.user);
    auto ps = params.psi.find(t.item);
    if (th == params.theta.end() || ps == params.psi.end()) {
      if (skipped == nullptr) {
        throw std::invalid_argument("missing parameters for pair (" +
                                    std::to_string(t.user) + "," +
                                    std::to_string(t.item) + ")");
      }
      ++skip;
      continue;
    }
    const double r = t.p - km_probability(th->second, ps->second);
    sq += r * r;
    ++n;
  }
  if (skipped != nullptr) *skipped = skip;
  if (n == 0) {
    throw std::invalid_argument("no evaluable triples in requested split");
  }
  return std::sqrt(sq / static_cast<double>(n));
}

}  // namespace

double training_rmse(const KmParams& params, const RatingDataset& data) {
  return split_rmse(params, data, Split::Train, nullptr);
}

double test_nrmse(const KmParams& params, const RatingDataset& data,
                  int* skipped) {
  int local = 0;
  return split_rmse(params, data, Split::Test, skipped ? skipped : &local);
}

}  // namespace km
