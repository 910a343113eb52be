#include "semilab/semigroup_engine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace semilab {

namespace detail {
struct SpectralCache {
    std::once_flag eig_once;
    EigenDecomposition eig;
    std::once_flag values_once;
    std::vector<std::complex<double>> values;
};
}  // namespace detail

namespace {

std::string fmt_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real();
    if (z.imag() != 0.0) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

bool by_real_part_desc(const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

Matrix symmetrized_generator(const Matrix& a, const Vector& w) {
    // D^{1/2} A D^{-1/2} = D^{-1/2} (D A) D^{-1/2}
    const Vector root = w.cwiseSqrt();
    Matrix s = root.asDiagonal() * a * root.cwiseInverse().asDiagonal();
    return 0.5 * (s + s.transpose());
}

// The entry of largest magnitude becomes positive.
void sign_normalize(Vector& v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
}

// Column of the complex eigenvector matrix whose eigenvalue is closest to target.
Vector real_eigenvector(const Matrix& a, double target, double* found) {
    Eigen::EigenSolver<Matrix> es(a, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
    const auto vals = es.eigenvalues();
    Eigen::Index best = 0;
    double dist = std::abs(vals(0) - target);
    for (Eigen::Index i = 1; i < vals.size(); ++i) {
        const double d = std::abs(vals(i) - target);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    if (found) *found = vals(best).real();
    Vector v = es.eigenvectors().col(best).real();
    const double nrm = v.norm();
    if (!(nrm > 0.0)) throw NumericalError("eigenvector of dominant eigenvalue has zero real part");
    return v / nrm;
}

void require_times(const std::vector<double>& times, const char* op) {
    if (times.empty()) throw InvalidInput(std::string(op) + ": time list is empty");
    for (double t : times) {
        if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput(std::string(op) + ": times must be finite and > 0");
    }
}

}  // namespace

void GridDescriptor::validate() const {
    if (n_nodes < 3) throw InvalidInput("grid: need at least 3 nodes");
    if (!(x_right > x_left) || !std::isfinite(x_left) || !std::isfinite(x_right)) {
        throw InvalidInput("grid: need x_left < x_right");
    }
}

Generator::Generator(Matrix matrix, Vector mass_weights, bool symmetric, std::string label,
                     std::optional<GridDescriptor> grid)
    : matrix_(std::move(matrix)),
      weights_(std::move(mass_weights)),
      symmetric_(symmetric),
      label_(std::move(label)),
      grid_(std::move(grid)),
      cache_(std::make_shared<detail::SpectralCache>()) {
    require_valid(matrix_, "generator");
    if (matrix_.rows() != matrix_.cols()) throw InvalidInput("generator: matrix must be square");
    if (weights_.size() != matrix_.rows()) throw InvalidInput("generator: mass weight length mismatch");
    if (!weights_.allFinite() || (weights_.array() <= 0.0).any()) {
        throw InvalidInput("generator: mass weights must be finite and > 0");
    }
    if (symmetric_) {
        const Matrix wa = weights_.asDiagonal() * matrix_;
        const double asym = relative_asymmetry(wa);
        if (asym > 1e-10) {
            std::ostringstream os;
            os << "generator '" << label_ << "': flagged symmetric but weighted asymmetry is " << asym;
            throw InvalidInput(os.str());
        }
    }
    if (grid_) grid_->validate();
}

Generator Generator::from_matrix(Matrix matrix, std::string label) {
    require_valid(matrix, "generator");
    if (matrix.rows() != matrix.cols()) throw InvalidInput("generator: matrix must be square");
    const bool sym = relative_asymmetry(matrix) <= 1e-12;
    Vector w = Vector::Ones(matrix.rows());
    return Generator(std::move(matrix), std::move(w), sym, std::move(label));
}

const EigenDecomposition& Generator::symmetrized_eig() const {
    if (!symmetric_) throw InvalidInput("symmetrized_eig: generator '" + label_ + "' is not symmetric");
    std::call_once(cache_->eig_once, [this] {
        cache_->eig = sym_eig(symmetrized_generator(matrix_, weights_));
    });
    return cache_->eig;
}

const std::vector<std::complex<double>>& Generator::eigenvalues() const {
    std::call_once(cache_->values_once, [this] {
        std::vector<std::complex<double>> vals;
        if (symmetric_) {
            const Vector& ev = symmetrized_eig().eigenvalues;
            vals.reserve(static_cast<std::size_t>(ev.size()));
            for (Eigen::Index i = ev.size() - 1; i >= 0; --i) vals.emplace_back(ev(i), 0.0);
        } else {
            Eigen::EigenSolver<Matrix> es(matrix_, false);
            if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
            const auto ev = es.eigenvalues();
            vals.assign(ev.data(), ev.data() + ev.size());
            std::sort(vals.begin(), vals.end(), by_real_part_desc);
        }
        cache_->values = std::move(vals);
    });
    return cache_->values;
}

double spectral_bound(const Generator& g) { return g.eigenvalues().front().real(); }

SpectralSummary spectral_summary(const Generator& g) {
    const auto& vals = g.eigenvalues();
    SpectralSummary s;
    s.lambda0 = vals.front().real();
    if (vals.size() == 1) {
        s.simple = true;
        return s;
    }
    s.lambda1 = vals[1].real();
    const double scale = std::max(1.0, std::abs(s.lambda0));
    const double gap = s.lambda0 - *s.lambda1;
    s.simple = gap >= 1e-8 * scale && std::abs(vals.front().imag()) <= 1e-8 * scale;
    s.gap = s.simple ? gap : 0.0;
    return s;
}

MetzlerReport is_metzler(const Generator& g, double tol) {
    const Matrix& a = g.matrix();
    MetzlerReport r;
    const Eigen::Index n = a.rows();
    bool first = true;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == j) continue;
            if (first || a(i, j) < r.worst_off_diagonal) r.worst_off_diagonal = a(i, j);
            first = false;
        }
    }
    r.metzler = r.worst_off_diagonal >= -tol;
    return r;
}

bool is_irreducible(const Generator& g, double threshold) {
    if (!is_metzler(g).metzler) {
        throw InvalidInput("irreducibility requires a positive semigroup (generator '" + g.label() +
                           "' has a negative off-diagonal entry)");
    }
    const Matrix& a = g.matrix();
    const Eigen::Index n = a.rows();
    // Edge i -> j when a(j, i) > threshold. Strongly connected iff node 0
    // reaches everything in the graph and in its reverse.
    auto reaches_all = [&](bool reverse) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<Eigen::Index> stack{0};
        seen[0] = 1;
        Eigen::Index count = 1;
        while (!stack.empty()) {
            const Eigen::Index i = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i || seen[static_cast<std::size_t>(j)]) continue;
                const double w = reverse ? a(i, j) : a(j, i);
                if (w > threshold) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

double EquilibriumProjection::pair(const Vector& f) const { return (weights.array() * phi.array() * f.array()).sum(); }

EquilibriumProjection equilibrium_projection(const Generator& g) {
    const SpectralSummary s = spectral_summary(g);
    if (!s.simple) {
        const auto& vals = g.eigenvalues();
        throw NumericalError("equilibrium_projection: dominant eigenvalue is not simple (closest pair " +
                             fmt_complex(vals[0]) + ", " + fmt_complex(vals[1]) + ")");
    }
    EquilibriumProjection p;
    p.lambda0 = s.lambda0;
    p.weights = g.mass_weights();
    const Eigen::Index n = g.size();
    const Vector& w = p.weights;

    if (g.symmetric()) {
        const EigenDecomposition& eig = g.symmetrized_eig();
        Vector q0 = eig.eigenvectors.col(n - 1);
        sign_normalize(q0);
        p.u = q0.cwiseQuotient(w.cwiseSqrt());  // <u,u>_w = 1
        p.phi = p.u;
    } else {
        Vector u = real_eigenvector(g.matrix(), s.lambda0, nullptr);
        sign_normalize(u);
        u /= u.cwiseAbs().maxCoeff();
        Vector psi = real_eigenvector(g.matrix().transpose(), s.lambda0, nullptr);
        const double pairing = psi.dot(u);
        if (!(std::abs(pairing) > 1e-300)) {
            throw NumericalError("equilibrium_projection: left and right eigenvectors are orthogonal");
        }
        psi /= pairing;
        p.u = u;
        p.phi = psi.cwiseQuotient(w);
    }
    p.rank1 = p.u * (w.cwiseProduct(p.phi)).transpose();

    const Matrix& a = g.matrix();
    const double right_res = (a * p.u - p.lambda0 * p.u).norm();
    const Vector psi = w.cwiseProduct(p.phi);
    const double left_res = (a.transpose() * psi - p.lambda0 * psi).norm();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff()) * 1e-12 * static_cast<double>(n);
    if (right_res > std::max(1e-8, scale) * p.u.norm() || left_res > std::max(1e-8, scale) * psi.norm()) {
        std::ostringstream os;
        os << "equilibrium_projection: eigen-residual too large (right " << right_res << ", left " << left_res << ")";
        throw NumericalError(os.str());
    }

    if (is_metzler(g).metzler && is_irreducible(g)) {
        if ((p.u.array() <= 0.0).any() || (p.phi.array() <= 0.0).any()) {
            throw NumericalError("equilibrium_projection: irreducible positive semigroup but the Perron "
                                 "eigenvectors are not strictly positive (generator '" + g.label() + "')");
        }
    }
    return p;
}

Propagator::Propagator(Generator g) : g_(std::move(g)), lambda0_(spectral_bound(g_)) {}

Matrix Propagator::evolve(double t) const {
    if (!(t >= 0.0)) throw InvalidInput("semigroup evaluated at negative time");
    const Eigen::Index n = g_.size();
    if (t == 0.0) return Matrix::Identity(n, n);
    if (!g_.symmetric()) return expm_pade(g_.matrix(), t);
    const EigenDecomposition& eig = g_.symmetrized_eig();
    const Vector root = g_.mass_weights().cwiseSqrt();
    const Matrix core = expm_from_eig(eig, t);
    return root.cwiseInverse().asDiagonal() * core * root.asDiagonal();
}

Matrix Propagator::rescaled(double t) const {
    if (!(t >= 0.0)) throw InvalidInput("semigroup evaluated at negative time");
    const Eigen::Index n = g_.size();
    if (t == 0.0) return Matrix::Identity(n, n);
    if (!g_.symmetric()) {
        const Matrix shifted = g_.matrix() - lambda0_ * Matrix::Identity(n, n);
        return expm_pade(shifted, t);
    }
    const EigenDecomposition& eig = g_.symmetrized_eig();
    // Flushing underflowed factors keeps the products free of subnormals.
    const Vector e = (t * (eig.eigenvalues.array() - lambda0_)).exp().unaryExpr([](double v) {
        return v < 1e-290 ? 0.0 : v;
    }).matrix();
    const Vector root = g_.mass_weights().cwiseSqrt();
    const Matrix left = root.cwiseInverse().asDiagonal() * eig.eigenvectors * e.asDiagonal();
    const Matrix right = eig.eigenvectors.transpose() * root.asDiagonal();
    return left * right;
}

double Propagator::norm(const Matrix& a) const {
    return g_.symmetric() ? weighted_spectral_norm(a, g_.mass_weights()) : spectral_norm(a);
}

std::vector<ProfilePoint> convergence_profile(const Generator& g, const EquilibriumProjection& p,
                                              const std::vector<double>& times, ProfileMethod method) {
    require_times(times, "convergence_profile");
    const Eigen::Index n = g.size();
    if (p.rank1.rows() != n || p.u.size() != n) throw InvalidInput("convergence_profile: projection size mismatch");

    if (method == ProfileMethod::automatic) {
        method = (g.symmetric() && n > 400) ? ProfileMethod::spectral : ProfileMethod::explicit_norm;
    }

    std::vector<ProfilePoint> out;
    out.reserve(times.size());

    if (method == ProfileMethod::spectral) {
        if (!g.symmetric()) throw InvalidInput("convergence_profile: spectral method needs a symmetric generator");
        // D^{1/2} P D^{-1/2} = a b^T; it equals q0 q0^T exactly when a and b
        // are both parallel to q0 and a.b = 1.
        const EigenDecomposition& eig = g.symmetrized_eig();
        const Vector root = g.mass_weights().cwiseSqrt();
        const Vector a = root.cwiseProduct(p.u);
        const Vector b = root.cwiseProduct(p.phi.cwiseProduct(p.weights).cwiseQuotient(g.mass_weights()));
        const Vector q0 = eig.eigenvectors.col(n - 1);
        const bool parallel = std::abs(std::abs(a.dot(q0)) - a.norm()) <= 1e-10 * a.norm() &&
                              std::abs(std::abs(b.dot(q0)) - b.norm()) <= 1e-10 * b.norm();
        if (!parallel || std::abs(a.dot(b) - 1.0) > 1e-10 || std::abs(p.lambda0 - eig.eigenvalues(n - 1)) > 1e-12 * std::max(1.0, std::abs(p.lambda0))) {
            throw InvalidInput("convergence_profile: spectral method requires the generator's own equilibrium projection");
        }
        for (double t : times) {
            double d = 0.0;
            for (Eigen::Index k = 0; k + 1 < n; ++k) {
                d = std::max(d, std::exp(t * (eig.eigenvalues(k) - p.lambda0)));
            }
            out.push_back({t, d});
        }
        return out;
    }

    const Propagator prop(g);
    for (double t : times) {
        const Matrix r = prop.rescaled(t);
        // rescaled() divides by e^{lambda0 t} of the generator; p.lambda0 is
        // the same number unless the caller mixes generators.
        const Matrix diff = std::exp(t * (prop.lambda0() - p.lambda0)) * r - p.rank1;
        out.push_back({t, prop.norm(diff)});
    }
    return out;
}

RateFit fit_exponential_rate(const std::vector<ProfilePoint>& profile) {
    std::vector<double> ts;
    std::vector<double> ys;
    for (const auto& pt : profile) {
        if (pt.distance > 1e-14 && std::isfinite(pt.distance)) {
            ts.push_back(pt.t);
            ys.push_back(std::log(pt.distance));
        }
    }
    if (ts.size() < 4) throw InvalidInput("fit_exponential_rate: profile too short or fully converged");
    const double m = static_cast<double>(ts.size());
    double tbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tbar += ts[i];
        ybar += ys[i];
    }
    tbar /= m;
    ybar /= m;
    double stt = 0.0;
    double sty = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        sty += (ts[i] - tbar) * (ys[i] - ybar);
    }
    if (!(stt > 0.0)) throw InvalidInput("fit_exponential_rate: all retained points share one time");
    const double slope = sty / stt;
    const double intercept = ybar - slope * tbar;
    return {std::exp(intercept), -slope, static_cast<int>(ts.size())};
}

std::string to_string(AsymptoticClass c) {
    switch (c) {
        case AsymptoticClass::decay_to_zero: return "decay_to_zero";
        case AsymptoticClass::converges_rank1: return "converges_rank1";
        case AsymptoticClass::not_convergent_fixed_functional: return "not_convergent_fixed_functional";
        case AsymptoticClass::not_convergent_multi: return "not_convergent_multi";
    }
    return "unknown";
}

AsymptoticClassification classify_asymptotics(const Generator& g, const ClassifyOptions& opt) {
    const MetzlerReport mz = is_metzler(g);
    if (!mz.metzler) {
        throw InvalidInput("classify_asymptotics requires a positive semigroup; generator '" + g.label() +
                           "' has off-diagonal entry " + std::to_string(mz.worst_off_diagonal));
    }
    const auto& vals = g.eigenvalues();
    const double spb = vals.front().real();
    AsymptoticClassification out;
    out.rescaled = opt.rescale_to_spectral_bound || spb > opt.kernel_tol;
    out.lambda = out.rescaled ? spb : 0.0;

    for (const auto& z : vals) {
        if (std::abs(z - out.lambda) <= opt.kernel_tol) ++out.dual_kernel_dim;
        if (std::abs(z.real() - out.lambda) <= opt.kernel_tol && std::abs(z.imag()) > opt.kernel_tol) {
            out.peripheral_spectrum.push_back(z);
        }
    }

    const Eigen::Index n = g.size();
    if (out.dual_kernel_dim == 0) {
        out.kernel_dim = 0;
    } else if (g.symmetric()) {
        out.kernel_dim = out.dual_kernel_dim;  // diagonalizable
    } else {
        const Matrix shifted = g.matrix() - out.lambda * Matrix::Identity(n, n);
        Eigen::BDCSVD<Matrix> svd(shifted);
        const Vector sv = svd.singularValues();
        const double cutoff = opt.kernel_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
        out.kernel_dim = static_cast<int>((sv.array() <= cutoff).count());
    }

    if (out.dual_kernel_dim == 0) {
        out.kind = AsymptoticClass::decay_to_zero;
    } else if (out.dual_kernel_dim == 1) {
        out.kind = out.kernel_dim >= 1 ? AsymptoticClass::converges_rank1
                                       : AsymptoticClass::not_convergent_fixed_functional;
    } else {
        out.kind = AsymptoticClass::not_convergent_multi;
    }
    return out;
}

}  // namespace semilab
