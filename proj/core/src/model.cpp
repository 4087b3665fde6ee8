#include "reprofit/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reprofit {

namespace {

constexpr double kLn10 = 2.302585092994046;
// Floor on the curve mean keeps the log-likelihood finite even where the
// curve underflows (huge c/e with a steep slope).
constexpr double kMinMean = 1e-300;

// lgamma(n + r) - lgamma(r). Summing log(r + k) is exact to a few ulp and
// avoids the cancellation of two ~1e9 lgamma values when r is huge (the
// omega -> 0 Poisson limit); the direct difference is fine for large n.
double lgamma_ratio(long n, double r) {
    if (n <= 512) {
        double s = 0.0;
        for (long k = 0; k < n; ++k) s += std::log(r + static_cast<double>(k));
        return s;
    }
    return std::lgamma(static_cast<double>(n) + r) - std::lgamma(r);
}

}  // namespace

std::string family_name(Family family) {
    switch (family) {
        case Family::Poisson: return "poisson";
        case Family::NegBin1: return "negbin1";
        case Family::NegBin2: return "negbin2";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "poisson") return Family::Poisson;
    if (name == "negbin1") return Family::NegBin1;
    if (name == "negbin2") return Family::NegBin2;
    throw std::invalid_argument("unknown model family '" + name + "'");
}

double log_logistic(double concentration, const CurveParams& curve) {
    if (concentration <= 0.0) return curve.d;
    const double t = curve.b * std::log(concentration / curve.e);
    if (t > 700.0) return curve.d * std::exp(-t);  // (c/e)^b overflows; f ~ d (e/c)^b
    return curve.d / (1.0 + std::exp(t));
}

double negbin_logpmf(long n, double p, double r) {
    if (n < 0) throw std::invalid_argument("negbin_logpmf: n < 0");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("negbin_logpmf: p outside (0,1)");
    if (!(r > 0.0)) throw std::domain_error("negbin_logpmf: r <= 0");
    double lp = lgamma_ratio(n, r) + r * std::log(p);
    if (n > 0) {
        lp += -std::lgamma(static_cast<double>(n) + 1.0) + static_cast<double>(n) * std::log1p(-p);
    }
    return lp;
}

double poisson_logpmf(long n, double mu) {
    if (n < 0) throw std::invalid_argument("poisson_logpmf: n < 0");
    if (!(mu >= 0.0)) throw std::domain_error("poisson_logpmf: mu < 0");
    if (mu < kMinMean) mu = kMinMean;
    if (n == 0) return -mu;
    return -mu + static_cast<double>(n) * std::log(mu) - std::lgamma(static_cast<double>(n) + 1.0);
}

NegBinParams negbin2_params(double f, double nid, double omega) {
    return {1.0 / (1.0 + omega * f * nid), 1.0 / omega};
}

NegBinParams negbin1_params(double f, double nid, double omega) {
    // Eq-level convention fixed by the gamma-Poisson mixture: mixing
    // Gamma(f/omega, 1/omega) with Poisson(f_ij * nid) marginalizes to
    // p = (1/omega) / (1/omega + nid), r = f/omega, so the mean is
    // r(1-p)/p = f*nid and the variance f*nid*(1 + omega*nid).
    return {1.0 / (1.0 + omega * nid), f / omega};
}

long mixture_sample(double f_mean, double nid, double omega, Family family, Rng& rng) {
    double f_ij = 0.0;
    switch (family) {
        case Family::NegBin2:
            f_ij = rng.gamma(1.0 / omega, 1.0 / (omega * f_mean));
            break;
        case Family::NegBin1:
            f_ij = rng.gamma(f_mean / omega, 1.0 / omega);
            break;
        case Family::Poisson:
            throw std::invalid_argument("mixture_sample: family must be NegBin1 or NegBin2");
    }
    return rng.poisson(f_ij * nid);
}

double replicate_logpmf(const ModelSpec& spec, const ReplicateDatum& datum) {
    double f = log_logistic(datum.concentration, spec.curve);
    if (f < kMinMean) f = kMinMean;
    switch (spec.stochastic.kind) {
        case Family::Poisson:
            return poisson_logpmf(datum.n_offspring, f * datum.nid);
        case Family::NegBin1: {
            const auto [p, r] = negbin1_params(f, datum.nid, spec.stochastic.omega);
            return negbin_logpmf(datum.n_offspring, p, r);
        }
        case Family::NegBin2: {
            const auto [p, r] = negbin2_params(f, datum.nid, spec.stochastic.omega);
            return negbin_logpmf(datum.n_offspring, p, r);
        }
    }
    return -std::numeric_limits<double>::infinity();
}

double log_likelihood(const ModelSpec& spec, const BioassayDataset& data) {
    double ll = 0.0;
    for (const auto& datum : data.replicates) ll += replicate_logpmf(spec, datum);
    return ll;
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: x <= 0");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv
              - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

namespace {

// Partials of f(c) with respect to (log d, log e, log10 b).
struct CurveGrad {
    double f;
    double d_logd;
    double d_loge;
    double d_log10b;
};

CurveGrad curve_gradient(double c, const CurveParams& curve) {
    CurveGrad g{};
    if (c <= 0.0) {
        g.f = curve.d;
        g.d_logd = curve.d;
        return g;  // u = (c/e)^b vanishes along with its partials
    }
    const double logratio = std::log(c / curve.e);
    const double t = curve.b * logratio;
    double u, f;
    if (t > 700.0) {
        u = std::numeric_limits<double>::infinity();
        f = curve.d * std::exp(-t);
    } else {
        u = std::exp(t);
        f = curve.d / (1.0 + u);
    }
    const double u_frac = std::isinf(u) ? 1.0 : u / (1.0 + u);
    g.f = f;
    g.d_logd = f;
    g.d_loge = f * curve.b * u_frac;
    g.d_log10b = -f * u_frac * logratio * curve.b * kLn10;
    return g;
}

}  // namespace

std::vector<double> loglik_gradient(const ModelSpec& spec, const BioassayDataset& data) {
    const bool has_omega = spec.stochastic.kind != Family::Poisson;
    std::vector<double> grad(has_omega ? 4 : 3, 0.0);
    const double omega = spec.stochastic.omega;

    for (const auto& datum : data.replicates) {
        const CurveGrad cg = curve_gradient(datum.concentration, spec.curve);
        const double f = std::max(cg.f, kMinMean);
        const double nid = datum.nid;
        const double n = static_cast<double>(datum.n_offspring);
        const double mu = f * nid;

        double dll_df = 0.0;      // d loglik / d f
        double dll_domega = 0.0;  // d loglik / d omega
        switch (spec.stochastic.kind) {
            case Family::Poisson:
                dll_df = (n - mu) / f;
                break;
            case Family::NegBin2: {
                // l = lgamma(n+1/w) - lgamma(1/w) - lgamma(n+1)
                //     - (1/w) log1p(w mu) + n log(w mu) - n log1p(w mu)
                const double r = 1.0 / omega;
                dll_df = nid * (n - mu) / (mu * (1.0 + omega * mu));
                dll_domega = (digamma(n + r) - digamma(r)) * (-1.0 / (omega * omega))
                             + std::log1p(omega * mu) / (omega * omega)
                             - (1.0 / omega) * mu / (1.0 + omega * mu)
                             + n / omega - n * mu / (1.0 + omega * mu);
                break;
            }
            case Family::NegBin1: {
                // l = lgamma(n+r) - lgamma(r) - lgamma(n+1) + r log p + n log(1-p),
                // r = f/w, p = 1/(1 + w nid).
                const double r = f / omega;
                const double logp = -std::log1p(omega * nid);
                const double psi_term = digamma(n + r) - digamma(r) + logp;
                dll_df = psi_term / omega;
                dll_domega = psi_term * (-f / (omega * omega))
                             + r * (-nid / (1.0 + omega * nid))
                             + n * (1.0 / omega - nid / (1.0 + omega * nid));
                break;
            }
        }

        grad[0] += dll_df * cg.d_logd;
        grad[1] += dll_df * cg.d_loge;
        grad[2] += dll_df * cg.d_log10b;
        if (has_omega) grad[3] += dll_domega * omega * kLn10;
    }
    return grad;
}

}  // namespace reprofit
