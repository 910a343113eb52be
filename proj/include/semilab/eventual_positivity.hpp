#pragma once

// Eventual positivity of self-adjoint matrix semigroups.
//
// Every verdict here is sampled: it holds at the grid times recorded in the
// certificate and nothing is claimed between samples.

#include <optional>
#include <string>
#include <vector>

#include "semilab/semigroup_engine.hpp"

namespace semilab {

enum class PositivityVerdict { positive, eventually_positive, not_eventually_positive, inconclusive };
std::string to_string(PositivityVerdict v);

struct MinEntrySample {
    double t = 0.0;
    double min_entry = 0.0;  // min_ij of R(t) = e^{-lambda0 t} S(t)
    double sup_norm = 0.0;   // ||R(t)||_inf
};

struct PositivityCertificate {
    PositivityVerdict verdict = PositivityVerdict::inconclusive;
    std::vector<MinEntrySample> min_entry_series;
    std::optional<double> t1;
    std::optional<double> domination_constant;
    double eps = 1e-10;
    std::string diagnostic;
};

/// Hypotheses of the self-adjoint eventual positivity criterion for a
/// reference vector u > 0.
///
/// (1) |S(t0) f| <= C_f u. In finite dimensions this always holds; the report
///     keeps C = max_i || |S(t0) e_i| / u ||_inf rather than a verdict.
/// (2) the top eigenvalue is simple with eigenvector w >= c u, c > 0; w has
///     unit Euclidean norm and positive largest entry.
struct Theorem81Report {
    bool self_adjoint = true;
    Vector u_ref;
    double probe_time = 0.0;
    double domination_ratio = 0.0;  // C
    bool domination_hypothesis = true;
    double eigenvector_bound_c = 0.0;
    bool lambda0_simple = false;
    bool eigenvector_hypothesis = false;  // c > 1e-8 and lambda0 simple
    Vector dominant_eigenvector;

    bool hypotheses_hold() const { return domination_hypothesis && eigenvector_hypothesis; }
};

/// t0 <= 0 selects 1 / gap. Throws InvalidInput for non-symmetric generators
/// or a reference vector that is not entrywise > 0.
Theorem81Report check_theorem_8_1_hypotheses(const Generator& g, const Vector& u, double t0 = 0.0);

/// 48 geometric points from 1e-3/gap to 50/gap (gap = 1 when undefined).
std::vector<double> default_positivity_grid(const Generator& g, int points = 48);

/// Geometric grid between t_min and t_max.
std::vector<double> geometric_grid(double t_min, double t_max, int points);

/// Samples min_ij R(t) over a geometric grid (ratio > 1, >= 10 points,
/// spanning >= 3 decades) and locates t1, the first grid time from which on
/// every sample satisfies min_entry >= -eps ||R(t)||_inf. Metzler generators
/// are certified positive from the exact criterion. A non-simple dominant
/// eigenvalue gives an inconclusive verdict.
PositivityCertificate minimal_positivity_time(const Generator& g, const std::vector<double>& times,
                                              double eps = 1e-10);

/// c = min_i (R(t) f)_i / u_i for f >= 0, f != 0, u > 0 and t > 0.
double strong_positivity_certificate(const Generator& g, const Vector& u, const Vector& f, double t);

}  // namespace semilab
