#include "circlift/anderson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "circlift/errors.hpp"
#include "circlift/parallel.hpp"
#include "circlift/rotation.hpp"

namespace circlift {

namespace {

// plane angle of the parabolic direction (1, -1) of the edge matrix A_{0,0}
constexpr double kParabolicAngle = 3.0 * M_PI / 4.0;

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

// Plane-angle advance of a transfer-type matrix [[m11, -1], [1, 0]] acting on
// the direction w, on the branch continuous in (m11, w). Givens split
// M = R(alpha) T with T upper triangular, positive diagonal: the rotation
// contributes alpha = atan2(1, m11) in (0, pi), and T keeps w in its open
// half-plane, so its advance is the minimal angle. m21 = 1 keeps alpha off
// the atan2 cut, which is what makes the branch continuous across the family.
double plane_angle_advance(double m11, double wx, double wy) {
    const double h = std::hypot(m11, 1.0);
    const double alpha = std::atan2(1.0, m11);
    const double t11 = h, t12 = -m11 / h, t22 = 1.0 / h;
    const double vx = t11 * wx + t12 * wy;
    const double vy = t22 * wy;
    const double cross = wx * vy - wy * vx;
    const double dot = wx * vx + wy * vy;
    return alpha + std::atan2(cross, dot);
}

} // namespace

Matrix2 transfer_matrix(double E, double v) { return {E - v, -1.0, 1.0, 0.0}; }

ProjectivePoint ProjectivePoint::from_lift(double x) { return {x - std::floor(x), x}; }

void ProjectivePoint::advance_to(double new_lift) {
    lift = new_lift;
    angle = new_lift - std::floor(new_lift);
}

double projective_chart_step(double eps, double u, double t) {
    if (t == 1.0)
        throw ValidationError("projective_chart_step: t = 1 is the chart's point at infinity; use the angle form");
    return -1.0 + eps - u - 1.0 / (t - 1.0);
}

double projective_lift_step(const Matrix2& m, double x) {
    require(m.det() > 0, "projective_lift_step: matrix must have positive determinant");
    const double theta = x - std::floor(x);
    const double wx = std::cos(M_PI * theta), wy = std::sin(M_PI * theta);
    const double vx = m.a11 * wx + m.a12 * wy;
    const double vy = m.a21 * wx + m.a22 * wy;
    require(vx != 0.0 || vy != 0.0, "projective_lift_step: matrix annihilated the direction");
    const double theta_next = std::atan2(vy, vx) / M_PI; // direction defined mod 1
    double delta = theta_next - theta;
    delta -= std::floor(delta);          // into [0, 1)
    if (delta > 0.5) delta -= 1.0;       // wrap to (-1/2, 1/2], ties positive
    return x + delta;
}

AndersonModel::AndersonModel(double a, DisorderMeasure nu, DensityConstants lower_edge, DensityConstants upper_edge)
    : a_(a), nu_(std::move(nu)), lower_(lower_edge), upper_(upper_edge) {
    require(nu_.dimension() == 1, "AndersonModel: potential disorder must be one-dimensional");
    require(nu_.support_min(0) >= 0, "AndersonModel: shifted disorder must be supported in [0, b-a]");
}

AndersonModel AndersonModel::uniform(double a, double b) {
    require(b > a, "AndersonModel::uniform: requires a < b");
    const double C = 1.0 / (b - a);
    return AndersonModel(a, DisorderMeasure::uniform_box(1, {b - a}), {C, 1.0}, {C, 1.0});
}

AndersonModel AndersonModel::bernoulli(std::vector<double> atoms, std::vector<double> weights) {
    require(!atoms.empty() && atoms.size() == weights.size(), "AndersonModel::bernoulli: atoms/weights must pair up");
    double lo = HUGE_VAL, hi = -HUGE_VAL, w_lo = 0, w_hi = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (weights[i] <= 0) continue;
        if (atoms[i] < lo) { lo = atoms[i]; w_lo = weights[i]; }
        if (atoms[i] > hi) { hi = atoms[i]; w_hi = weights[i]; }
    }
    require(std::isfinite(lo), "AndersonModel::bernoulli: no atom carries positive weight");
    std::vector<double> shifted(atoms);
    for (double& v : shifted) v -= lo;
    return AndersonModel(lo, DisorderMeasure::bernoulli_product(1, shifted, weights), {w_lo, 1.0}, {w_hi, 1.0});
}

AndersonModel AndersonModel::point_mass(double v) {
    return AndersonModel(v, DisorderMeasure::bernoulli_product(1, {0.0}, {1.0}), {1.0, 1.0}, {1.0, 1.0});
}

double AndersonModel::sample_potential(const CounterRng& rng, uint64_t site) const {
    double u;
    nu_.sample_letter(rng, site, {&u, 1});
    return a_ + u;
}

std::string AndersonModel::describe() const {
    std::ostringstream os;
    os << "anderson[a=" << a_ << ",b=" << b() << "," << nu_.describe() << "]";
    return os.str();
}

nlohmann::json AndersonModel::to_json() const {
    return nlohmann::json{{"a", a_},
                          {"nu", nu_.to_json()},
                          {"lower", {{"C", lower_.C}, {"l", lower_.l}}},
                          {"upper", {{"C", upper_.C}, {"l", upper_.l}}}};
}

AndersonModel AndersonModel::from_json(const nlohmann::json& spec) {
    require(spec.is_object() && spec.contains("kind"), "anderson mu spec: need an object with a \"kind\"");
    const std::string kind = spec.at("kind").get<std::string>();
    for (auto it = spec.begin(); it != spec.end(); ++it) {
        const std::string& key = it.key();
        require(key == "kind" || key == "a" || key == "b" || key == "atoms" || key == "weights" || key == "v",
                "anderson mu spec: unknown key \"" + key + "\"");
    }
    if (kind == "uniform") return uniform(spec.at("a").get<double>(), spec.at("b").get<double>());
    if (kind == "bernoulli")
        return bernoulli(spec.at("atoms").get<std::vector<double>>(), spec.at("weights").get<std::vector<double>>());
    if (kind == "point") return point_mass(spec.at("v").get<double>());
    throw ValidationError("anderson mu spec: unknown kind \"" + kind + "\"");
}

AndersonLift::AndersonLift(AndersonModel model, double certified_eps_radius)
    : model_(std::move(model)), certified_eps_radius_(certified_eps_radius) {
    require(certified_eps_radius_ > 0 && certified_eps_radius_ < 0.5,
            "AndersonLift: certified eps radius must lie in (0, 1/2)");
}

std::string AndersonLift::name() const { return "anderson-lift[" + model_.describe() + "]"; }

ParamBox AndersonLift::domain_box() const {
    const double width = model_.nu().support_max(0);
    // eps spans [E_- - 1, E_+ + 1] shifted to edge coordinates
    return {-1.0, width + 5.0, {0.0}, {width}};
}

ParamBox AndersonLift::certified_box() const {
    return {-certified_eps_radius_, certified_eps_radius_, {0.0}, {model_.nu().support_max(0)}};
}

double AndersonLift::eval(double eps, std::span<const double> u, double x) const {
    // orientation is reversed relative to the plane angle (so dG/deps >= 0)
    // and the branch carries the fixed +1 shift that normalizes G_{0,0}(0) = 0
    // at the parabolic direction
    const double theta_plane = kParabolicAngle - M_PI * x;
    const double wx = std::cos(theta_plane), wy = std::sin(theta_plane);
    const double m11 = -2.0 + eps - u[0];
    return x + 1.0 - plane_angle_advance(m11, wx, wy) / M_PI;
}

double free_lattice_ids(double E) {
    if (E <= -2.0) return 0.0;
    if (E >= 2.0) return 1.0;
    return std::acos(-E / 2.0) / M_PI;
}

IdsValue ids_rotation(const AndersonModel& model, double E, const IdsOrbitParams& params) {
    AndersonLift lift(model);
    const double eps = E - model.e_minus();
    RotationEstimate est =
        estimate_rotation_number(lift, eps, model.nu(), params.n, params.replicates, 0.0, params.seed, params.threads);
    IdsValue out;
    out.value = est.rho_hat;
    out.stderr_ = est.stderr_;
    out.resolved = est.windings > 0;
    return out;
}

IdsValue ids_sturm(const AndersonModel& model, double E, int N, int realizations, uint64_t seed, int threads) {
    require(N >= 2, "ids_sturm: volume N must be >= 2");
    require(realizations >= 1, "ids_sturm: realizations must be >= 1");
    std::vector<double> per_real(realizations);
    parallel_for(static_cast<std::size_t>(realizations), [&](std::size_t r) {
        CounterRng rng(seed, r);
        double d = HUGE_VAL; // 1/d vanishes for the first site
        int64_t count = 0;
        for (int i = 0; i < N; ++i) {
            const double v = model.sample_potential(rng, static_cast<uint64_t>(i));
            d = v - E - 1.0 / d;
            if (d == 0.0) d = 1e-300; // zero pivot counts as +0
            if (d < 0) ++count;
        }
        per_real[r] = static_cast<double>(count) / N;
    }, threads);
    IdsValue out;
    out.value = std::accumulate(per_real.begin(), per_real.end(), 0.0) / realizations;
    if (realizations > 1) {
        double ss = 0;
        for (double v : per_real) ss += (v - out.value) * (v - out.value);
        out.stderr_ = std::sqrt(ss / (realizations - 1) / realizations);
    }
    out.resolved = out.value > 0.0;
    return out;
}

std::string to_string(IdsRoute route) {
    switch (route) {
        case IdsRoute::Rotation: return "rotation";
        case IdsRoute::Sturm: return "sturm";
        case IdsRoute::FreeClosedForm: return "free-closed-form";
    }
    return "?";
}

std::string to_string(SpectralEdge side) { return side == SpectralEdge::Lower ? "lower" : "upper"; }

IdsCurve ids_curve(const AndersonModel& model, IdsRoute route, std::span<const double> e_grid,
                   const IdsOrbitParams& orbit, int volume, int realizations, int threads) {
    IdsCurve curve;
    curve.route = route;
    curve.seed = orbit.seed;
    curve.n_or_volume = route == IdsRoute::Rotation ? orbit.n : static_cast<uint64_t>(volume);
    curve.replicates_or_realizations = route == IdsRoute::Rotation ? orbit.replicates : realizations;
    curve.points.resize(e_grid.size());
    // parallel across grid points; the per-point estimators stay serial
    parallel_for(e_grid.size(), [&](std::size_t i) {
        const double E = e_grid[i];
        IdsValue v;
        switch (route) {
            case IdsRoute::Rotation: {
                IdsOrbitParams serial = orbit;
                serial.threads = 1;
                v = ids_rotation(model, E, serial);
                break;
            }
            case IdsRoute::Sturm:
                v = ids_sturm(model, E, volume, realizations, orbit.seed, 1);
                break;
            case IdsRoute::FreeClosedForm:
                v.value = free_lattice_ids(E);
                v.resolved = true;
                break;
        }
        curve.points[i] = {E, v};
    }, threads);
    return curve;
}

EdgeScanResult edge_scan(const AndersonModel& model, SpectralEdge side, IdsRoute route,
                         std::span<const double> eps_grid, const IdsOrbitParams& orbit, int volume, int realizations,
                         int threads) {
    for (double eps : eps_grid) require(eps >= 0, "edge_scan: eps grid must be nonnegative");
    EdgeScanResult result;
    result.side = side;
    result.route = route;
    result.points.resize(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) {
        const double eps = eps_grid[i];
        EdgeScanPoint point;
        point.eps = eps;
        if (eps == 0.0) {
            point.rho_tilde = 0.0;
            point.resolved = false; // rho~(0) = 0 by definition; no ratio exists
            result.points[i] = point;
            return;
        }
        const double E = side == SpectralEdge::Lower ? model.e_minus() + eps : model.e_plus() - eps;
        IdsValue ids;
        switch (route) {
            case IdsRoute::Rotation: {
                IdsOrbitParams serial = orbit;
                serial.threads = 1;
                ids = ids_rotation(model, E, serial);
                break;
            }
            case IdsRoute::Sturm:
                ids = ids_sturm(model, E, volume, realizations, orbit.seed, 1);
                break;
            case IdsRoute::FreeClosedForm:
                ids.value = free_lattice_ids(E);
                break;
        }
        point.rho_tilde = side == SpectralEdge::Lower ? ids.value : 1.0 - ids.value;
        point.stderr_ = ids.stderr_;
        point.resolved = point.rho_tilde > 0.0 && point.rho_tilde < 1.0;
        if (point.resolved) {
            point.log_log_ratio = std::log(-std::log(point.rho_tilde)) / std::log(eps);
            point.log_log_ratio_stderr = point.stderr_ / (point.rho_tilde * std::abs(std::log(point.rho_tilde)) *
                                                          std::abs(std::log(eps)));
        }
        result.points[i] = point;
    }, threads);

    std::vector<std::pair<double, double>> pairs;
    for (const auto& p : result.points) pairs.emplace_back(p.eps, p.rho_tilde);
    std::size_t valid = 0;
    for (const auto& [eps, rho] : pairs)
        if (eps > 0 && eps < 1 && rho > 0 && rho < 1) ++valid;
    if (valid >= 2) result.fit = fit_lifshitz_exponent(pairs);
    return result;
}

AssumptionReport verify_anderson_hypotheses(const AndersonModel& model, double r) {
    require(r > 0 && r < 0.5, "verify_anderson_hypotheses: r must lie in (0, 1/2)");
    AndersonLift lift(model, r);

    AssumptionCheckOptions opts;
    // the quadratic window of the induced family is narrow; the cubic term of
    // the projective action bends the log-log fit outside ~5e-3
    opts.delta0 = 5e-3;
    opts.fit_decades = 1.7;
    AssumptionReport report = verify_assumptions(lift, opts);

    AssumptionCheck m1;
    m1.pass = model.nu().support_has_two_points();
    if (!m1.pass) m1.witness = "support of the potential distribution has fewer than two points (a = b)";
    report.m1 = m1;

    AssumptionCheck m2;
    const double eps_values[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    auto density_check = model.nu().verify_density_constants(eps_values);
    m2.pass = model.lower_density().C > 0 && model.lower_density().l > 0 && density_check.ok;
    if (!m2.pass) {
        std::ostringstream os;
        os << "declared density constants overstate the CDF at eps=" << density_check.worst_eps << " (claimed "
           << density_check.claimed << " > actual " << density_check.actual << ")";
        m2.witness = os.str();
    }
    report.m2 = m2;
    return report;
}

} // namespace circlift
