#pragma once

#include "km/types.hpp"

namespace km {

// Pr(X=1) = theta' psi.
double km_probability(const SimplexVector& theta, const IndicatorVector& psi);

// Pr(X=0) = theta' (1 - psi); complements km_probability to 1.
double km_complement(const SimplexVector& theta, const IndicatorVector& psi);

// rating / r_max, validated against [0, r_max].
double empirical_probability(double rating, double r_max);

// RMSE of (p - theta' psi) over the train split.
double training_rmse(const KmParams& params, const RatingDataset& data);

// RMSE of (p - theta' psi) over the test split; predictions are already on
// the [0,1] probability scale so no further normalization applies. Test
// triples whose user or item has no trained parameters are skipped and
// counted in *skipped when provided.
double test_nrmse(const KmParams& params, const RatingDataset& data,
                  int* skipped = nullptr);

}  // namespace km
