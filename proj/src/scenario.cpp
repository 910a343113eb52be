#include "semilab/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "semilab/discretization.hpp"
#include "semilab/parallel.hpp"

namespace semilab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

const std::vector<ScenarioInfo> registry = {
    {"ex4_1", "Laplacian with nonlocal boundary conditions (measure-coupled boundary values)",
     "jump-back random walk on (0,1); converges to nu (x) 1"},
    {"ex4_2a", "one-dimensional Schroedinger semigroup with absorption, case (a)",
     "u'' - m u with constant m > 0; decays to zero"},
    {"ex7_1", "confined Schroedinger operator on the line, asymptotic compactness",
     "m = 1 outside [-1,1]; rescaled semigroup converges to w (x) w"},
    {"ex7_2", "Schroedinger operator on the line with explicit ground state",
     "m = (6x^2-2)/(1+x^2)^2; kernel spanned by 1/(1+x^2)"},
    {"ex9_1", "Laplacian with the boundary condition u'(0) = -u'(1) = u(0) + u(1)",
     "eventually positive, not positive"},
    {"ex9_2", "Schroedinger system with a matrix-valued potential",
     "N = 3, kernel of V spanned by (1,1,1); eventually positive"},
    {"heat_neumann", "Neumann heat equation, the basic positive irreducible semigroup",
     "converges to the mean at rate pi^2/L^2"},
    {"heat_dirichlet", "Dirichlet heat equation, decay to zero",
     "spectral bound -pi^2/L^2"},
};

bool uses_L(const std::string& s) { return s != "ex4_1" && s != "ex9_1"; }

// Run-wide state for report files; removes them unless committed.
class OutputGuard {
public:
    explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : written_) fs::remove(f, ec);
        if (created_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }
    bool active() const { return !dir_.empty(); }

    fs::path open(const std::string& name, std::ofstream& out) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_ = true;
        }
        const fs::path p = dir_ / name;
        written_.push_back(p);
        out.open(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
        return p;
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_ = false;
    bool committed_ = false;
};

struct Resolved {
    double L = 1.0;
    int n = 0;
    int N = 1;
    int points = 24;
    int grid_points = 48;
    double eps = 1e-10;
    double kernel_tol = 1e-7;
    double absorption = 0.01;
    std::optional<double> t_max;
};

Resolved resolve(const ScenarioConfig& cfg) {
    Resolved r;
    const std::string& s = cfg.scenario;
    if (s == "ex4_1") r.n = 100;
    if (s == "ex4_2a") r.L = 10.0, r.n = 500;
    if (s == "ex7_1") r.L = 10.0;
    if (s == "ex7_2") r.L = 20.0, r.n = 2000;
    if (s == "ex9_1") r.n = 100;
    if (s == "ex9_2") r.n = 200, r.N = 3;
    if (s == "heat_neumann" || s == "heat_dirichlet") r.n = 200;
    if (cfg.L) r.L = *cfg.L;
    if (s == "ex7_1") r.n = static_cast<int>(std::lround(40.0 * r.L));
    if (cfg.n) r.n = *cfg.n;
    if (cfg.N) r.N = *cfg.N;
    if (cfg.points) r.points = *cfg.points;
    if (cfg.grid_points) r.grid_points = *cfg.grid_points;
    if (cfg.eps) r.eps = *cfg.eps;
    if (cfg.kernel_tol) r.kernel_tol = *cfg.kernel_tol;
    if (cfg.absorption) r.absorption = *cfg.absorption;
    r.t_max = cfg.t_max;
    return r;
}

Generator build(const std::string& s, const Resolved& r) {
    if (s == "ex4_1") {
        return nonlocal_dirichlet_diffusion(r.n, uniform_jump_weights(r.n), uniform_jump_weights(r.n));
    }
    if (s == "ex4_2a") {
        const double m = r.absorption;
        return absorption_1d([m](double) { return m; }, r.L, r.n);
    }
    if (s == "ex7_1") return schrodinger_1d(confined_potential, r.L, r.n, "confined_schrodinger");
    if (s == "ex7_2") return schrodinger_1d(potential_example_7_2, r.L, r.n, "explicit_ground_state");
    if (s == "ex9_1") return nonlocal_laplace_interval(r.n);
    if (s == "ex9_2") return schrodinger_system(GridDescriptor{0.0, r.L, r.n}, example_9_2_potential());
    if (s == "heat_neumann") return neumann_heat(r.n, r.L);
    return dirichlet_heat(r.n, r.L);
}

bool classify_rescaled(const std::string& s) {
    return s == "ex7_1" || s == "ex7_2" || s == "ex4_1" || s == "heat_neumann";
}

void add(ScenarioReport& rep, std::string name, bool value, double tol, std::string detail) {
    rep.verdicts.push_back(Verdict{std::move(name), value, tol, std::move(detail)});
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Stage runner: tags any exception with the stage name.
template <class Fn>
auto stage(const char* name, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), false);
    }
}

void scenario_checks(ScenarioReport& rep, const Generator& g, const EquilibriumProjection& proj,
                     const Resolved& r) {
    const std::string& s = rep.scenario;
    const double lambda0 = rep.spectrum.lambda0;
    const Eigen::Index n = g.size();

    if (s == "heat_neumann") {
        add(rep, "lambda0 = 0", std::abs(lambda0) <= 1e-10, 1e-10, "lambda0 = " + describe(lambda0));
        const double target = pi2 / (r.L * r.L);
        const double err = rep.fit ? std::abs(rep.fit->delta - target) / target : 1.0;
        rep.measurements["delta_relative_error"] = err;
        add(rep, "fitted delta matches pi^2/L^2", err <= 0.02, 0.02, "relative error " + describe(err));
    } else if (s == "heat_dirichlet") {
        const double target = -pi2 / (r.L * r.L);
        const double err = std::abs(lambda0 - target) / std::abs(target);
        rep.measurements["lambda0_relative_error"] = err;
        add(rep, "spectral bound matches -pi^2/L^2", err <= 0.01, 0.01, "relative error " + describe(err));
    } else if (s == "ex4_1") {
        double worst = 0.0;
        for (double t : {0.1, 1.0, 10.0}) {
            const Vector ones = Vector::Ones(n);
            worst = std::max(worst, (expm(g.matrix(), t) * ones - ones).cwiseAbs().maxCoeff());
        }
        rep.measurements["conservation_error"] = worst;
        add(rep, "S(t) 1 = 1 at t = 0.1, 1, 10", worst <= 1e-10, 1e-10, "max deviation " + describe(worst));
        const double u_dev = (proj.u - Vector::Ones(n)).cwiseAbs().maxCoeff();
        rep.measurements["u_constant_deviation"] = u_dev;
        add(rep, "u is constant", u_dev <= 1e-8, 1e-8, "max |u - 1| " + describe(u_dev));
        const Vector nu = proj.weights.cwiseProduct(proj.phi);
        rep.measurements["nu_min"] = nu.minCoeff();
        rep.measurements["nu_total"] = nu.sum();
        add(rep, "nu entrywise > 0", nu.minCoeff() > 0.0, 0.0, "min nu " + describe(nu.minCoeff()));
        add(rep, "nu has total mass 1", std::abs(nu.sum() - 1.0) <= 1e-8, 1e-8, "total " + describe(nu.sum()));
        add(rep, "exponential rate fit succeeded", rep.fit.has_value() && rep.fit->delta > 0.0, 0.0,
            rep.fit ? "delta " + describe(rep.fit->delta) : "no fit");
    } else if (s == "ex4_2a") {
        add(rep, "spectral bound <= -1e-4", lambda0 <= -1e-4, 1e-4, "lambda0 = " + describe(lambda0));
    } else if (s == "ex7_1") {
        add(rep, "dominant eigenvalue simple with gap > 0", rep.spectrum.simple && rep.spectrum.gap > 0.0, 1e-8,
            "gap " + describe(rep.spectrum.gap));
    } else if (s == "ex7_2") {
        add(rep, "|spectral bound| <= 5e-3", std::abs(lambda0) <= 5e-3, 5e-3, "lambda0 = " + describe(lambda0));
        const GridDescriptor grid = *g.grid();
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = grid.node(static_cast<int>(i) + 1);
            w(i) = 1.0 / (1.0 + x * x);
        }
        const Vector u = proj.u * (proj.u.dot(w) / proj.u.squaredNorm());
        const double rel = (u - w).norm() / w.norm();
        rep.measurements["kernel_relative_error"] = rel;
        add(rep, "kernel eigenfunction matches 1/(1+x^2)", rel <= 1e-2, 1e-2, "rel. err " + describe(rel));
        // (w'' - m w) on the grid, nodes with |x| <= L/2
        double res = 0.0;
        const double h = grid.h();
        for (Eigen::Index i = 1; i + 1 < n; ++i) {
            const double x = grid.node(static_cast<int>(i) + 1);
            if (std::abs(x) > 0.5 * r.L) continue;
            const double lap = (w(i - 1) - 2.0 * w(i) + w(i + 1)) / (h * h);
            res = std::max(res, std::abs(lap - potential_example_7_2(x) * w(i)));
        }
        rep.measurements["stencil_residual"] = res;
        add(rep, "stencil residual of w'' = m w", res <= 5e-3, 5e-3, "max norm " + describe(res));
    } else if (s == "ex9_1") {
        add(rep, "not positive", !rep.metzler.metzler, 0.0,
            "off-diagonal entry " + describe(rep.metzler.worst_off_diagonal));
        const bool ev = rep.positivity && rep.positivity->verdict == PositivityVerdict::eventually_positive;
        add(rep, "eventually positive", ev, r.eps, ev ? "t1 = " + describe(*rep.positivity->t1) : "no t1");
        if (ev && (proj.u.array() > 0.0).all()) {
            const double t = 2.0 * *rep.positivity->t1;
            double cmin = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 5; ++k) {
                const Eigen::Index idx = (n - 1) * k / 4;
                const double c = strong_positivity_certificate(g, proj.u, Vector::Unit(n, idx), t);
                rep.measurements["strong_positivity_c" + std::to_string(k)] = c;
                cmin = std::min(cmin, c);
            }
            add(rep, "strongly positive at 2 t1 for 5 basis vectors", cmin > 0.0, 0.0, "min c " + describe(cmin));
        } else {
            add(rep, "strongly positive at 2 t1 for 5 basis vectors", false, 0.0, "no positive reference vector");
        }
    } else if (s == "ex9_2") {
        const MatrixPotentialCheck chk = check_matrix_potential(*g.grid(), example_9_2_potential());
        rep.measurements["kernel_angle"] = chk.kernel_angle;
        add(rep, "matrix potential invariants", chk.ok, 1e-6, chk.ok ? "ok" : chk.reason);
        add(rep, "not positive", !rep.metzler.metzler, 0.0,
            "off-diagonal entry " + describe(rep.metzler.worst_off_diagonal));
        add(rep, "spectral bound = 0", std::abs(lambda0) <= 1e-8, 1e-8, "lambda0 = " + describe(lambda0));
        const Vector c = Vector::Ones(n).normalized();
        const Vector u = proj.u.normalized();
        const double dev = (u - u.dot(c) * c).norm();
        rep.measurements["eigenvector_deviation"] = dev;
        add(rep, "eigenvector proportional to c (x) 1", dev <= 1e-6, 1e-6, "sine of angle " + describe(dev));
        const bool ev = rep.positivity && rep.positivity->verdict == PositivityVerdict::eventually_positive;
        add(rep, "eventually positive", ev, r.eps, ev ? "t1 = " + describe(*rep.positivity->t1) : "no t1");
    }
}

ordered_json opt_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json to_json(const ScenarioReport& rep) {
    ordered_json j;
    j["scenario"] = rep.scenario;
    j["citation"] = rep.citation;
    j["generator"] = rep.generator_label;
    j["unknowns"] = rep.unknowns;
    j["parameters"] = ordered_json::object();
    for (const auto& [k, v] : rep.parameters) j["parameters"][k] = v;
    j["spectrum"] = {{"lambda0", rep.spectrum.lambda0},
                     {"lambda1", opt_number(rep.spectrum.lambda1)},
                     {"gap", rep.spectrum.gap},
                     {"simple", rep.spectrum.simple}};
    ordered_json pos = {{"metzler", rep.metzler.metzler},
                        {"worst_off_diagonal", rep.metzler.worst_off_diagonal},
                        {"irreducible", rep.irreducible ? ordered_json(*rep.irreducible) : ordered_json(nullptr)}};
    if (rep.positivity) {
        const auto& c = *rep.positivity;
        pos["eventual"] = {{"verdict", to_string(c.verdict)},
                           {"t1", opt_number(c.t1)},
                           {"domination_constant", opt_number(c.domination_constant)},
                           {"eps", c.eps},
                           {"grid_points", c.min_entry_series.size()},
                           {"diagnostic", c.diagnostic}};
    } else {
        pos["eventual"] = nullptr;
    }
    j["positivity"] = pos;
    ordered_json conv = {{"projection_lambda0", rep.projection_lambda0},
                         {"profile_points", rep.profile.size()},
                         {"final_distance", rep.final_distance}};
    if (rep.fit) {
        conv["M"] = rep.fit->M;
        conv["delta"] = rep.fit->delta;
        conv["points_used"] = rep.fit->points_used;
    }
    j["convergence"] = conv;
    if (rep.classification) {
        const auto& c = *rep.classification;
        j["classification"] = {{"kind", to_string(c.kind)},
                               {"lambda", c.lambda},
                               {"rescaled", c.rescaled},
                               {"dual_kernel_dim", c.dual_kernel_dim},
                               {"kernel_dim", c.kernel_dim},
                               {"peripheral_count", c.peripheral_spectrum.size()}};
    } else {
        j["classification"] = nullptr;
    }
    j["measurements"] = ordered_json::object();
    for (const auto& [k, v] : rep.measurements) j["measurements"][k] = v;
    j["verdicts"] = ordered_json::array();
    for (const auto& v : rep.verdicts) {
        j["verdicts"].push_back({{"name", v.name}, {"value", v.value}, {"tolerance", v.tolerance}, {"detail", v.detail}});
    }
    return j;
}

// key,value rows for every number and boolean in the summary.
void flatten(const ordered_json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_boolean()) {
        out << prefix << ',' << (j.get<bool>() ? 1 : 0) << '\n';
    } else if (j.is_number_float()) {
        out << prefix << ',' << format_number(j.get<double>()) << '\n';
    } else if (j.is_number()) {
        out << prefix << ',' << j.dump() << '\n';
    }
}

void write_reports(ScenarioReport& rep, OutputGuard& guard) {
    std::ofstream out;
    rep.files.push_back(guard.open("profile.csv", out));
    out << "t,distance,min_entry\n";
    for (std::size_t k = 0; k < rep.profile.size(); ++k) {
        out << format_number(rep.profile[k].t) << ',' << format_number(rep.profile[k].distance) << ','
            << format_number(rep.profile_min_entry[k]) << '\n';
    }
    out.close();
    if (rep.positivity) {
        rep.files.push_back(guard.open("positivity.csv", out));
        out << "t,min_entry,sup_norm\n";
        for (const auto& s : rep.positivity->min_entry_series) {
            out << format_number(s.t) << ',' << format_number(s.min_entry) << ',' << format_number(s.sup_norm)
                << '\n';
        }
        out.close();
    }
    rep.files.push_back(guard.open("summary.json", out));
    const ordered_json j = to_json(rep);
    out << j.dump(2) << '\n';
    out.close();
    rep.files.push_back(guard.open("summary.csv", out));
    out << "key,value\n";
    flatten(j, "", out);
    out.close();
    if (!out) throw std::runtime_error("failed to write reports");
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != value.size() || value.empty() || !std::isfinite(v)) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config: '" + key + "' expects an integer");
    return static_cast<int>(v);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

StageError::StageError(std::string stage, const std::string& what, bool config)
    : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), config_(config) {}

const std::vector<ScenarioInfo>& scenario_registry() { return registry; }

const ScenarioInfo* find_scenario(const std::string& name) {
    for (const auto& s : registry) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::string list_scenarios(bool json) {
    if (json) {
        ordered_json arr = ordered_json::array();
        for (const auto& s : registry) {
            arr.push_back({{"name", s.name}, {"citation", s.citation}, {"description", s.description}});
        }
        return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    for (const auto& s : registry) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-16s", s.name.c_str());
        os << buf << s.citation << '\n';
    }
    return os.str();
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool ScenarioReport::all_verdicts_true() const {
    for (const auto& v : verdicts) {
        if (!v.value) return false;
    }
    return true;
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
    if (key == "scenario") scenario = value;
    else if (key == "L") L = parse_double(key, value);
    else if (key == "n") n = parse_int(key, value);
    else if (key == "N") N = parse_int(key, value);
    else if (key == "t_max") t_max = parse_double(key, value);
    else if (key == "points") points = parse_int(key, value);
    else if (key == "grid_points") grid_points = parse_int(key, value);
    else if (key == "eps") eps = parse_double(key, value);
    else if (key == "kernel_tol") kernel_tol = parse_double(key, value);
    else if (key == "absorption") absorption = parse_double(key, value);
    else if (key == "output_dir") output_dir = value;
    else throw ConfigError("config: unknown key '" + key + "'");
}

void ScenarioConfig::set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ScenarioConfig::load_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot read " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line.substr(0, line.find('#')));
        if (t.empty()) continue;
        try {
            set_assignment(t);
        } catch (const ConfigError& e) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void ScenarioConfig::validate() const {
    if (!find_scenario(scenario)) throw ConfigError("config: unknown scenario '" + scenario + "'");
    if (L && !(*L > 0.0)) throw ConfigError("config: L must be > 0");
    if (L && !uses_L(scenario)) throw ConfigError("config: scenario '" + scenario + "' has no parameter L");
    if (n && (*n < 3 || *n > 4000)) throw ConfigError("config: n must lie in [3, 4000]");
    if (N && scenario != "ex9_2") throw ConfigError("config: N applies to ex9_2 only");
    if (N && *N != 3) throw ConfigError("config: the ex9_2 potential is defined for N = 3 only");
    if (absorption && scenario != "ex4_2a") throw ConfigError("config: absorption applies to ex4_2a only");
    if (absorption && !(*absorption > 0.0)) throw ConfigError("config: absorption must be > 0");
    if (t_max && !(*t_max > 0.0)) throw ConfigError("config: t_max must be > 0");
    if (points && (*points < 4 || *points > 10000)) throw ConfigError("config: points must lie in [4, 10000]");
    if (grid_points && (*grid_points < 10 || *grid_points > 10000)) {
        throw ConfigError("config: grid_points must lie in [10, 10000]");
    }
    if (eps && !(*eps >= 0.0)) throw ConfigError("config: eps must be >= 0");
    if (kernel_tol && !(*kernel_tol > 0.0)) throw ConfigError("config: kernel_tol must be > 0");
    const Resolved r = resolve(*this);
    if (r.n > 4000) throw ConfigError("config: n = " + std::to_string(r.n) + " exceeds 4000");
    if (static_cast<long>(r.N) * r.n > 5000) throw ConfigError("config: N * n exceeds 5000");
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw StageError("configure", e.what(), true);
    }
    const Resolved r = resolve(cfg);
    const ScenarioInfo& info = *find_scenario(cfg.scenario);

    ScenarioReport rep;
    rep.scenario = info.name;
    rep.citation = info.citation;
    rep.parameters = {{"n", r.n}, {"points", r.points}, {"eps", r.eps}, {"kernel_tol", r.kernel_tol}};
    if (uses_L(cfg.scenario)) rep.parameters["L"] = r.L;
    if (cfg.scenario == "ex9_2") rep.parameters["N"] = r.N;
    if (cfg.scenario == "ex4_2a") rep.parameters["absorption"] = r.absorption;

    OutputGuard guard(cfg.output_dir);

    const Generator g = [&] {
        try {
            return build(cfg.scenario, r);
        } catch (const InvalidInput& e) {
            throw StageError("build", e.what(), true);
        } catch (const std::exception& e) {
            throw StageError("build", e.what(), false);
        }
    }();
    rep.generator_label = g.label();
    rep.unknowns = static_cast<int>(g.size());

    rep.spectrum = stage("spectrum", [&] { return spectral_summary(g); });
    rep.metzler = stage("positivity", [&] { return is_metzler(g); });
    if (rep.metzler.metzler) {
        rep.irreducible = stage("irreducibility", [&] { return is_irreducible(g); });
        add(rep, "positive", true, 0.0, "all off-diagonal entries >= 0");
        add(rep, "irreducible", *rep.irreducible, 1e-12, "off-diagonal digraph strongly connected");
    } else {
        rep.positivity = stage("eventual_positivity", [&] {
            return minimal_positivity_time(g, default_positivity_grid(g, r.grid_points), r.eps);
        });
    }

    const EquilibriumProjection proj = stage("projection", [&] { return equilibrium_projection(g); });
    rep.projection_lambda0 = proj.lambda0;

    stage("profile", [&] {
        const double t_max = r.t_max ? *r.t_max : 8.0 / rep.spectrum.gap;
        std::vector<double> times;
        for (int k = 1; k <= r.points; ++k) times.push_back(t_max * k / r.points);
        rep.profile = convergence_profile(g, proj, times);
        const Propagator prop(g);
        rep.profile_min_entry = parallel_map(times.size(), [&](std::size_t k) {
            return prop.rescaled(times[k]).minCoeff();
        });
        rep.final_distance = rep.profile.back().distance;
        return 0;
    });
    rep.fit = stage("rate_fit", [&] { return fit_exponential_rate(rep.profile); });

    if (rep.metzler.metzler) {
        rep.classification = stage("classification", [&] {
            ClassifyOptions opt;
            opt.rescale_to_spectral_bound = classify_rescaled(cfg.scenario);
            opt.kernel_tol = r.kernel_tol;
            return classify_asymptotics(g, opt);
        });
        const AsymptoticClass expected = classify_rescaled(cfg.scenario) ? AsymptoticClass::converges_rank1
                                                                          : AsymptoticClass::decay_to_zero;
        add(rep, "classification " + to_string(expected), rep.classification->kind == expected, r.kernel_tol,
            "found " + to_string(rep.classification->kind));
    }
    stage("checks", [&] {
        scenario_checks(rep, g, proj, r);
        return 0;
    });

    if (guard.active()) {
        stage("write", [&] {
            write_reports(rep, guard);
            return 0;
        });
        guard.commit();
    }
    return rep;
}

SweepReport run_sweep(const ScenarioConfig& cfg, const std::string& parameter, const std::vector<double>& values) {
    if (parameter != "L" && parameter != "n") throw ConfigError("sweep: parameter must be L or n");
    if (values.size() < 2) throw ConfigError("sweep: need at least two values");
    if (parameter == "L" && !uses_L(cfg.scenario)) {
        throw ConfigError("sweep: scenario '" + cfg.scenario + "' has no parameter L");
    }
    std::vector<ScenarioConfig> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ScenarioConfig c = cfg;
        if (parameter == "L") {
            c.L = values[i];
        } else {
            if (values[i] != std::floor(values[i])) throw ConfigError("sweep: n values must be integers");
            c.n = static_cast<int>(values[i]);
        }
        if (!cfg.output_dir.empty()) c.output_dir = cfg.output_dir / (parameter + "_" + std::to_string(i));
        try {
            c.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("sweep: value ") + describe(values[i]) + ": " + e.what());
        }
        rows.push_back(std::move(c));
    }

    SweepReport out;
    out.parameter = parameter;
    out.values = values;
    std::vector<std::string> errors(values.size());
    out.reports = parallel_map(rows.size(), [&](std::size_t i) -> std::optional<ScenarioReport> {
        try {
            return run_scenario(rows[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            return std::nullopt;
        }
    });

    std::vector<SweepRow> table_rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.size = values[i];
        const auto& rep = out.reports[i];
        if (rep) {
            row.spectral_bound = rep->spectrum.lambda0;
            row.gap = rep->spectrum.gap;
            if (rep->fit) row.delta_fit = rep->fit->delta;
            out.t1.push_back(rep->positivity ? rep->positivity->t1 : std::nullopt);
        } else {
            row.error = errors[i];
            out.t1.emplace_back();
        }
        table_rows.push_back(std::move(row));
    }
    out.table = tabulate_sweep(std::move(table_rows));

    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        out.csv = cfg.output_dir / "sweep.csv";
        std::ofstream f(out.csv, std::ios::binary | std::ios::trunc);
        f << parameter << ",lambda0,gap,delta_fit,t1,status\n";
        for (std::size_t i = 0; i < out.table.rows.size(); ++i) {
            const SweepRow& row = out.table.rows[i];
            f << format_number(row.size) << ',';
            if (row.error.empty()) {
                f << format_number(row.spectral_bound) << ',' << format_number(row.gap) << ','
                  << (row.delta_fit ? format_number(*row.delta_fit) : "") << ','
                  << (out.t1[i] ? format_number(*out.t1[i]) : "") << ",ok\n";
            } else {
                f << ",,,,failed\n";
            }
        }
        if (!f) throw std::runtime_error("sweep: failed to write " + out.csv.string());
    }
    return out;
}

}  // namespace semilab
