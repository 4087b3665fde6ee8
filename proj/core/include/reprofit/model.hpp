#pragma once

#include <string>
#include <vector>

#include "reprofit/dataset.hpp"
#include "reprofit/rng.hpp"

namespace reprofit {

/// Three-parameter log-logistic curve for the mean reproduction rate:
/// f(c) = d / (1 + (c/e)^b), with d the control rate (offspring per
/// individual-day), e the EC50 and b the slope. All strictly positive.
struct CurveParams {
    double d = 1.0;
    double e = 1.0;
    double b = 1.0;
};

enum class Family { Poisson, NegBin1, NegBin2 };

std::string family_name(Family family);
Family family_from_name(const std::string& name);

/// Observation model: Poisson counts, or gamma-mixed Poisson counts whose
/// marginal is negative binomial with overdispersion omega.
/// NegBin2 has quadratic mean-variance law var = mu(1 + omega*mu),
/// NegBin1 the linear law var = mu(1 + omega*NID).
struct StochasticFamily {
    Family kind = Family::Poisson;
    double omega = 0.0;  // meaningful iff kind != Poisson, then > 0
};

struct ModelSpec {
    CurveParams curve;
    StochasticFamily stochastic;
};

/// f(c) = d / (1 + (c/e)^b); f(0) = d by continuity, strictly decreasing.
double log_logistic(double concentration, const CurveParams& curve);

/// Log mass of the negative binomial with success probability p and size r:
/// log P(N = n) = lgamma(n+r) - lgamma(r) - lgamma(n+1) + r log p + n log(1-p),
/// mean r(1-p)/p, variance r(1-p)/p^2. Stable for r up to ~1e8 and n up to
/// ~1e6 (the lgamma difference is summed term-wise for small n).
double negbin_logpmf(long n, double p, double r);

/// Log mass of Poisson(mu) at n, in log space.
double poisson_logpmf(long n, double mu);

struct NegBinParams {
    double p = 0.0;
    double r = 0.0;
};

/// NegBin2 marginal of the gamma(1/omega, 1/(omega f)) mixture:
/// p = 1/(1 + omega*f*nid), r = 1/omega.
NegBinParams negbin2_params(double f, double nid, double omega);

/// NegBin1 marginal of the gamma(f/omega, 1/omega) mixture:
/// p = 1/(1 + omega*nid), r = f/omega.
NegBinParams negbin1_params(double f, double nid, double omega);

/// One draw of the hierarchical model: replicate rate f_ij from the family's
/// gamma mixing distribution (shape-rate convention), then
/// Poisson(f_ij * nid). Family must be NegBin1 or NegBin2.
long mixture_sample(double f_mean, double nid, double omega, Family family, Rng& rng);

/// Sum over replicates of the observation log-pmf at N given (C, NID).
double log_likelihood(const ModelSpec& spec, const BioassayDataset& data);

/// Log-pmf of a single replicate under the model.
double replicate_logpmf(const ModelSpec& spec, const ReplicateDatum& datum);

/// Gradient of log_likelihood with respect to the transformed parameters
/// (log d, log e, log10 b[, log10 omega]); 3 components for Poisson, else 4.
std::vector<double> loglik_gradient(const ModelSpec& spec, const BioassayDataset& data);

/// Digamma (psi) function, |error| < 1e-12 for x > 0.
double digamma(double x);

}  // namespace reprofit
