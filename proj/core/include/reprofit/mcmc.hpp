#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reprofit/rng.hpp"

namespace reprofit {

/// Log target density up to a constant; -inf encodes out-of-support.
using LogDensity = std::function<double(const std::vector<double>&)>;

/// Random-walk Metropolis with a full Gaussian proposal covariance adapted
/// Haario-style during the burn-in phase only; once adapt() returns, the
/// kernel is frozen so the sampling phase preserves detailed balance.
class AdaptiveMetropolis {
public:
    /// initial_step holds per-dimension proposal scales used until the
    /// empirical covariance takes over.
    AdaptiveMetropolis(LogDensity target, std::vector<double> init, std::vector<double> initial_step,
                       std::uint64_t seed);

    /// Burn-in with covariance and step-size adaptation (targets acceptance
    /// rate 0.3, wellinside the [0.2, 0.4] band).
    void adapt(int iterations);

    /// Advances the chain with the frozen kernel, appending every thin-th
    /// state to out (row-major, dim() values per stored draw).
    void run(int iterations, int thin, std::vector<double>& out);

    double last_acceptance_rate() const { return last_acceptance_rate_; }
    const std::vector<double>& state() const { return state_; }
    std::size_t dim() const { return state_.size(); }

private:
    void propose(std::vector<double>& out);
    bool step();

    LogDensity target_;
    std::vector<double> state_;
    double log_density_;
    Rng rng_;

    std::vector<double> chol_;  // proposal covariance Cholesky factor, row-major lower
    double log_scale_;
    // adaptation accumulators
    std::vector<double> mean_;
    std::vector<double> cov_;
    long adapt_count_ = 0;
    double last_acceptance_rate_ = 0.0;
};

/// Post-burn-in draws of a multi-chain run, on the reporting scale.
struct ChainSet {
    std::vector<std::string> param_names;
    std::size_t n_params = 0;
    std::vector<std::vector<double>> chains;  // per chain, row-major draws x params
    int thinning = 1;
    std::vector<double> acceptance_rates;     // per chain, sampling phase
    std::size_t iterations_per_chain = 0;     // pre-thinning main-run length

    std::size_t n_chains() const { return chains.size(); }
    std::size_t draws_per_chain() const {
        return chains.empty() ? 0 : chains.front().size() / n_params;
    }
    double value(std::size_t chain, std::size_t draw, std::size_t param) const {
        return chains[chain][draw * n_params + param];
    }
    /// One parameter's series within one chain.
    std::vector<double> param_series(std::size_t chain, std::size_t param) const;
    /// One parameter's draws pooled over chains.
    std::vector<double> pooled(std::size_t param) const;
};

/// Gelman-Rubin potential scale reduction factor with the Brooks-Gelman
/// degrees-of-freedom correction. Returns NaN for a parameter whose
/// within-chain variance is zero (not computable).
double gelman_rubin(const std::vector<std::vector<double>>& chains_of_one_param);

/// ESS by initial-positive-sequence truncation of the autocorrelation sum
/// (Geyer). A zero-variance series reports 1.
double effective_sample_size(const std::vector<double>& series);

}  // namespace reprofit
