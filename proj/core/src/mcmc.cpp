#include "reprofit/mcmc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reprofit {

namespace {

// Lower Cholesky factor of a dense SPD matrix (row-major); jitters the
// diagonal if needed.
std::vector<double> cholesky(std::vector<double> a, std::size_t n) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<double> L(n * n, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = a[i * n + j];
                for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    L[i * n + i] = std::sqrt(s);
                } else {
                    L[i * n + j] = s / L[j * n + j];
                }
            }
        }
        if (ok) return L;
        double max_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a[i * n + i]));
        const double jitter = std::max(1e-12, 1e-8 * max_diag) * std::pow(10.0, attempt);
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] += jitter;
    }
    throw std::runtime_error("cholesky: matrix not positive definite");
}

}  // namespace

AdaptiveMetropolis::AdaptiveMetropolis(LogDensity target, std::vector<double> init,
                                       std::vector<double> initial_step, std::uint64_t seed)
    : target_(std::move(target)),
      state_(std::move(init)),
      rng_(seed) {
    const std::size_t n = state_.size();
    if (initial_step.size() != n) throw std::invalid_argument("initial_step size mismatch");
    log_density_ = target_(state_);
    if (!std::isfinite(log_density_)) {
        throw std::invalid_argument("AdaptiveMetropolis: initial state has non-finite density");
    }
    chol_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) chol_[i * n + i] = initial_step[i];
    log_scale_ = 0.0;
    mean_ = state_;
    cov_.assign(n * n, 0.0);
    adapt_count_ = 1;
}

void AdaptiveMetropolis::propose(std::vector<double>& out) {
    const std::size_t n = state_.size();
    const double s = std::exp(log_scale_);
    thread_local std::vector<double> z;
    z.resize(n);
    for (auto& zi : z) zi = rng_.normal();
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j <= i; ++j) v += chol_[i * n + j] * z[j];
        out[i] = state_[i] + s * v;
    }
}

bool AdaptiveMetropolis::step() {
    thread_local std::vector<double> proposal;
    proposal.resize(state_.size());
    propose(proposal);
    const double lp = target_(proposal);
    const double log_alpha = lp - log_density_;
    bool accepted = false;
    if (log_alpha >= 0.0 || std::log(rng_.uniform_pos()) < log_alpha) {
        state_ = proposal;
        log_density_ = lp;
        accepted = true;
    }
    return accepted;
}

void AdaptiveMetropolis::adapt(int iterations) {
    const std::size_t n = state_.size();
    constexpr double target_accept = 0.3;
    for (int t = 0; t < iterations; ++t) {
        thread_local std::vector<double> proposal;
        proposal.resize(n);
        propose(proposal);
        const double lp = target_(proposal);
        const double log_alpha = lp - log_density_;
        const double alpha = std::isfinite(lp) ? std::min(1.0, std::exp(std::min(0.0, log_alpha))) : 0.0;
        if (alpha > 0.0 && (log_alpha >= 0.0 || std::log(rng_.uniform_pos()) < log_alpha)) {
            state_ = proposal;
            log_density_ = lp;
        }

        // Robbins-Monro step-size adaptation toward the target rate.
        const double gamma = std::pow(static_cast<double>(t + 2), -0.6);
        log_scale_ += gamma * (alpha - target_accept);

        // Welford update of mean and covariance of the visited states.
        ++adapt_count_;
        const double w = 1.0 / static_cast<double>(adapt_count_);
        thread_local std::vector<double> delta;
        delta.resize(n);
        for (std::size_t i = 0; i < n; ++i) delta[i] = state_[i] - mean_[i];
        for (std::size_t i = 0; i < n; ++i) mean_[i] += w * delta[i];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double upd = delta[i] * (state_[j] - mean_[j]);
                cov_[i * n + j] += (upd - cov_[i * n + j]) * w;
                cov_[j * n + i] = cov_[i * n + j];
            }
        }

        // Refresh the proposal shape once enough states have accumulated.
        if (adapt_count_ > static_cast<long>(10 * n) && t % 50 == 49) {
            std::vector<double> c = cov_;
            double max_diag = 0.0;
            for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, c[i * n + i]);
            if (max_diag > 0.0) {
                const double scale = 2.38 * 2.38 / static_cast<double>(n);
                for (auto& v : c) v *= scale;
                for (std::size_t i = 0; i < n; ++i) c[i * n + i] += 1e-12 * max_diag + 1e-300;
                chol_ = cholesky(std::move(c), n);
                log_scale_ = 0.0;
            }
        }
    }
}

void AdaptiveMetropolis::run(int iterations, int thin, std::vector<double>& out) {
    if (thin < 1) throw std::invalid_argument("thin must be >= 1");
    long accepted = 0;
    for (int t = 0; t < iterations; ++t) {
        if (step()) ++accepted;
        if ((t + 1) % thin == 0) out.insert(out.end(), state_.begin(), state_.end());
    }
    last_acceptance_rate_ = iterations > 0 ? static_cast<double>(accepted) / iterations : 0.0;
}

std::vector<double> ChainSet::param_series(std::size_t chain, std::size_t param) const {
    const std::size_t n = draws_per_chain();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = value(chain, i, param);
    return out;
}

std::vector<double> ChainSet::pooled(std::size_t param) const {
    std::vector<double> out;
    out.reserve(n_chains() * draws_per_chain());
    for (std::size_t c = 0; c < n_chains(); ++c) {
        for (std::size_t i = 0; i < draws_per_chain(); ++i) out.push_back(value(c, i, param));
    }
    return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    const std::size_t m = chains.size();
    if (m < 2) throw std::invalid_argument("gelman_rubin needs >= 2 chains");
    const std::size_t n = chains.front().size();
    if (n < 10) throw std::invalid_argument("gelman_rubin needs chains of length >= 10");
    for (const auto& c : chains) {
        if (c.size() != n) throw std::invalid_argument("gelman_rubin needs equal-length chains");
    }

    std::vector<double> chain_mean(m), chain_var(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (double x : chains[j]) s += x;
        chain_mean[j] = s / n;
        double v = 0.0;
        for (double x : chains[j]) v += (x - chain_mean[j]) * (x - chain_mean[j]);
        chain_var[j] = v / (n - 1);
    }
    double grand_mean = 0.0;
    for (double x : chain_mean) grand_mean += x;
    grand_mean /= m;

    double W = 0.0;
    for (double v : chain_var) W += v;
    W /= m;
    double B_over_n = 0.0;  // B/n = var of chain means
    for (double x : chain_mean) B_over_n += (x - grand_mean) * (x - grand_mean);
    B_over_n /= (m - 1);

    if (W <= 0.0) return std::numeric_limits<double>::quiet_NaN();

    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    const double sigma2 = (nd - 1.0) / nd * W + B_over_n;
    const double V = sigma2 + B_over_n / md;

    // Brooks-Gelman df correction: Rc = sqrt((d+3)/(d+1) * V/W) with
    // d = 2 V^2 / var(V), var(V) from the moments of chain means/variances.
    double var_w = 0.0;
    for (double v : chain_var) var_w += (v - W) * (v - W);
    var_w /= (m - 1);
    double cov_s2_xbar = 0.0, cov_s2_xbar2 = 0.0;
    double mean_xbar2 = 0.0;
    for (double x : chain_mean) mean_xbar2 += x * x;
    mean_xbar2 /= m;
    for (std::size_t j = 0; j < m; ++j) {
        cov_s2_xbar += (chain_var[j] - W) * (chain_mean[j] - grand_mean);
        cov_s2_xbar2 += (chain_var[j] - W) * (chain_mean[j] * chain_mean[j] - mean_xbar2);
    }
    cov_s2_xbar /= (m - 1);
    cov_s2_xbar2 /= (m - 1);

    const double B = nd * B_over_n;
    const double var_V = ((nd - 1.0) * (nd - 1.0) / (nd * nd)) * var_w / md
                         + ((md + 1.0) * (md + 1.0) / (md * md * nd * nd)) * 2.0 * B * B / (md - 1.0)
                         + 2.0 * (md + 1.0) * (nd - 1.0) / (md * nd * nd)
                               * (nd / md) * (cov_s2_xbar2 - 2.0 * grand_mean * cov_s2_xbar);
    double rhat2 = V / W;
    if (var_V > 0.0 && std::isfinite(var_V)) {
        const double df = 2.0 * V * V / var_V;
        if (df > 0.0) rhat2 *= (df + 3.0) / (df + 1.0);
    }
    return std::sqrt(rhat2);
}

double effective_sample_size(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 10) throw std::invalid_argument("effective_sample_size needs length >= 10");
    double m = 0.0;
    for (double x : series) m += x;
    m /= n;
    double c0 = 0.0;
    for (double x : series) c0 += (x - m) * (x - m);
    c0 /= n;
    if (c0 <= 0.0) return 1.0;

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (series[i] - m) * (series[i + lag] - m);
        return s / n;
    };

    // Geyer initial positive sequence: sum rho_t while the paired sums
    // rho_{2k} + rho_{2k+1} stay positive.
    double tau = 1.0;
    const std::size_t max_lag = n / 3;
    for (std::size_t k = 0;; ++k) {
        const std::size_t l1 = 2 * k + 1;
        const std::size_t l2 = 2 * k + 2;
        if (l2 > max_lag) break;
        const double pair = (autocov(l1) + autocov(l2)) / c0;
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    const double ess = static_cast<double>(n) / tau;
    return std::max(1.0, std::min(ess, static_cast<double>(n)));
}

}  // namespace reprofit
