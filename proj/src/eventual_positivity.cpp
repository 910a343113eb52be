#include "semilab/eventual_positivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semilab/parallel.hpp"

namespace semilab {

std::string to_string(PositivityVerdict v) {
    switch (v) {
        case PositivityVerdict::positive: return "positive";
        case PositivityVerdict::eventually_positive: return "eventually_positive";
        case PositivityVerdict::not_eventually_positive: return "not_eventually_positive";
        case PositivityVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Theorem81Report check_theorem_8_1_hypotheses(const Generator& g, const Vector& u, double t0) {
    if (!g.symmetric()) throw InvalidInput("eventual positivity criterion requires a self-adjoint generator ('" + g.label() + "')");
    if (u.size() != g.size() || !u.allFinite() || (u.array() <= 0.0).any()) {
        throw InvalidInput("check_theorem_8_1_hypotheses: reference vector must be entrywise > 0");
    }
    Theorem81Report r;
    r.u_ref = u;
    const SpectralSummary s = spectral_summary(g);
    r.lambda0_simple = s.simple;
    r.probe_time = t0 > 0.0 ? t0 : (s.gap > 0.0 ? 1.0 / s.gap : 1.0);

    const Propagator prop(g);
    const Matrix st = prop.evolve(r.probe_time);
    // column i is S(t0) e_i
    r.domination_ratio = (st.cwiseAbs().array().colwise() / u.array()).maxCoeff();
    r.domination_hypothesis = std::isfinite(r.domination_ratio);

    const EigenDecomposition& eig = g.symmetrized_eig();
    const Eigen::Index n = g.size();
    Vector w = eig.eigenvectors.col(n - 1).cwiseQuotient(g.mass_weights().cwiseSqrt());
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w(imax) < 0.0) w = -w;
    w.normalize();
    r.dominant_eigenvector = w;
    r.eigenvector_bound_c = std::max(0.0, w.cwiseQuotient(u).minCoeff());
    r.eigenvector_hypothesis = r.lambda0_simple && r.eigenvector_bound_c > 1e-8;
    return r;
}

std::vector<double> geometric_grid(double t_min, double t_max, int points) {
    if (!(t_min > 0.0) || !(t_max > t_min) || points < 2) {
        throw InvalidInput("geometric_grid: need 0 < t_min < t_max and at least 2 points");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    const double lr = std::log(t_max / t_min);
    for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = t_min * std::exp(lr * k / (points - 1));
    out.back() = t_max;
    return out;
}

std::vector<double> default_positivity_grid(const Generator& g, int points) {
    const SpectralSummary s = spectral_summary(g);
    const double gap = s.gap > 0.0 ? s.gap : 1.0;
    return geometric_grid(1e-3 / gap, 50.0 / gap, points);
}

PositivityCertificate minimal_positivity_time(const Generator& g, const std::vector<double>& times, double eps) {
    if (times.size() < 10) throw InvalidInput("minimal_positivity_time: need at least 10 grid times");
    if (!(times.front() > 0.0)) throw InvalidInput("minimal_positivity_time: grid times must be > 0");
    const double ratio = times[1] / times[0];
    if (!(ratio > 1.0)) throw InvalidInput("minimal_positivity_time: grid must be increasing");
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double r = times[k] / times[k - 1];
        if (std::abs(r - ratio) > 1e-6 * ratio) throw InvalidInput("minimal_positivity_time: grid is not geometric");
    }
    if (times.back() / times.front() < 1e3 * (1.0 - 1e-12)) {
        throw InvalidInput("minimal_positivity_time: grid must span at least 3 decades");
    }
    if (!(eps >= 0.0)) throw InvalidInput("minimal_positivity_time: eps must be >= 0");

    PositivityCertificate cert;
    cert.eps = eps;
    const Propagator prop(g);
    cert.min_entry_series = parallel_map(times.size(), [&](std::size_t k) {
        const Matrix r = prop.rescaled(times[k]);
        MinEntrySample s;
        s.t = times[k];
        s.min_entry = r.minCoeff();
        s.sup_norm = r.cwiseAbs().rowwise().sum().maxCoeff();
        return s;
    });

    const SpectralSummary summary = spectral_summary(g);
    if (!summary.simple) {
        cert.verdict = PositivityVerdict::inconclusive;
        cert.diagnostic = "dominant eigenvalue is not simple; the rescaled semigroup has no rank-one limit";
        return cert;
    }

    if (is_metzler(g).metzler) {
        cert.verdict = PositivityVerdict::positive;
        cert.t1 = times.front();
        cert.diagnostic = "Metzler generator: positive for all t >= 0";
    } else {
        std::optional<std::size_t> last_negative;
        for (std::size_t k = 0; k < cert.min_entry_series.size(); ++k) {
            const auto& s = cert.min_entry_series[k];
            if (s.min_entry < -eps * s.sup_norm) last_negative = k;
        }
        if (!last_negative) {
            cert.verdict = PositivityVerdict::positive;
            cert.t1 = times.front();
        } else if (*last_negative + 1 == times.size()) {
            cert.verdict = PositivityVerdict::not_eventually_positive;
            std::ostringstream os;
            os << "negative entries persist at the last grid time t = " << times.back();
            cert.diagnostic = os.str();
        } else {
            cert.verdict = PositivityVerdict::eventually_positive;
            cert.t1 = times[*last_negative + 1];
        }
    }
    const double tail_min = cert.min_entry_series.back().min_entry;
    if (cert.t1 && tail_min > 0.0) cert.domination_constant = tail_min;
    return cert;
}

double strong_positivity_certificate(const Generator& g, const Vector& u, const Vector& f, double t) {
    const Eigen::Index n = g.size();
    if (u.size() != n || (u.array() <= 0.0).any()) {
        throw InvalidInput("strong_positivity_certificate: u must be entrywise > 0");
    }
    if (f.size() != n || (f.array() < 0.0).any() || !(f.maxCoeff() > 0.0)) {
        throw InvalidInput("strong_positivity_certificate: f must be >= 0 and nonzero");
    }
    if (!(t > 0.0)) throw InvalidInput("strong_positivity_certificate: t must be > 0");
    const Propagator prop(g);
    const Vector rf = prop.rescaled(t) * f;
    return rf.cwiseQuotient(u).minCoeff();
}

}  // namespace semilab
