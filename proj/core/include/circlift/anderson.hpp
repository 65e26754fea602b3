#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "circlift/assumptions.hpp"
#include "circlift/disorder.hpp"
#include "circlift/fit.hpp"
#include "circlift/lift_family.hpp"

namespace circlift {

struct Matrix2 {
    double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
    double det() const { return a11 * a22 - a12 * a21; }
};

// A point of the projective circle: the angle parametrizes the line direction
// (cos pi*angle, sin pi*angle), and the lift tracks the continuous angle, so
// angle == lift mod 1 always.
struct ProjectivePoint {
    double angle = 0.0;
    double lift = 0.0;

    static ProjectivePoint from_lift(double x);
    void advance_to(double new_lift);
};

// One-step transfer matrix [[E - v, -1], [1, 0]] of the eigenvalue equation.
Matrix2 transfer_matrix(double E, double v);

// Projective action in the affine chart t = xi/eta + 1 at the lower edge:
// F(t) = -1 + eps - u - 1/(t - 1). The chart's point at infinity t = 1 is a
// singularity; callers switch to the angle form there.
double projective_chart_step(double eps, double u, double t);

// One-shot projective lift step: applies the matrix to the direction
// (cos pi theta, sin pi theta), theta = frac(x), and returns the lift value
// whose displacement is the projective rotation wrapped into (-1/2, 1/2]
// (ties resolve positive, so a quarter-turn matrix moves the lift by +1/2 and
// a parabolic matrix fixes its fixed direction exactly). For cocycle orbits
// use AndersonLift, which pins the branch by continuity in the family instead.
double projective_lift_step(const Matrix2& m, double x);

// 1D Anderson model: potential V_i i.i.d. with support [a, b]. Internally the
// shifted disorder u = V - a with distribution nu on [0, b-a] is stored, which
// is what the induced circle family consumes.
class AndersonModel {
public:
    // nu must be supported in [0, b-a]; a is the support offset of V.
    AndersonModel(double a, DisorderMeasure nu, DensityConstants lower_edge, DensityConstants upper_edge);

    static AndersonModel uniform(double a, double b);
    static AndersonModel bernoulli(std::vector<double> atoms, std::vector<double> weights);
    // Degenerate single-site fixture (free model when v = 0). Fails (M1).
    static AndersonModel point_mass(double v);

    double a() const { return a_; }
    double b() const { return a_ + nu_.support_max(0); }
    double e_minus() const { return a_ - 2.0; }
    double e_plus() const { return b() + 2.0; }
    const DisorderMeasure& nu() const { return nu_; }
    const DensityConstants& lower_density() const { return lower_; }
    const DensityConstants& upper_density() const { return upper_; }
    double sample_potential(const CounterRng& rng, uint64_t site) const;

    std::string describe() const;
    nlohmann::json to_json() const;
    static AndersonModel from_json(const nlohmann::json& spec);

private:
    double a_ = 0.0;
    DisorderMeasure nu_;
    DensityConstants lower_, upper_;
};

// The Schroedinger cocycle at the lower edge as a lift family: parameter
// eps = E - E_-, disorder u = V - a. The angle chart puts the parabolic
// direction of A_{0,0} at lift 0, oriented so increasing eps increases the
// lift, and the branch is the one continuous in (eps, u, x) normalized by
// G_{0,0}(0) = 0. With this normalization the family's rotation number equals
// the IDS: k(E_- + eps) = rho(eps).
class AndersonLift final : public LiftFamily {
public:
    explicit AndersonLift(AndersonModel model, double certified_eps_radius = 0.1);

    std::string name() const override;
    int tangency_k() const override { return 1; }
    int disorder_dim() const override { return 1; }
    ParamBox domain_box() const override;
    ParamBox certified_box() const override;
    // lift of the direction [0:1], the (M3) witness
    double x_star() const override { return -0.75; }
    double eval(double eps, std::span<const double> u, double x) const override;

    const AndersonModel& model() const { return model_; }

private:
    AndersonModel model_;
    double certified_eps_radius_;
};

// Closed-form IDS of the free lattice Laplacian, arccos(-E/2)/pi clamped to
// [0, 1] outside the band. The fixed oracle the two Monte Carlo routes are
// checked against.
double free_lattice_ids(double E);

struct IdsValue {
    double value = 0.0;
    double stderr_ = 0.0;
    bool resolved = true; // false when the estimator saw no signal at all
};

struct IdsOrbitParams {
    uint64_t n = 1'000'000;
    int replicates = 8;
    uint64_t seed = 1;
    int threads = 0;
};

// IDS through the rotation number of the edge-normalized cocycle lift.
IdsValue ids_rotation(const AndersonModel& model, double E, const IdsOrbitParams& params);

// Independent route: Sturm sign-change count of the Dirichlet restriction to
// a box of N sites, averaged over realizations. d_1 = V_1 - E,
// d_i = V_i - E - 1/d_{i-1}; eigenvalues below E = #{d_i < 0}; a zero pivot
// is treated as +0.
IdsValue ids_sturm(const AndersonModel& model, double E, int N, int realizations, uint64_t seed, int threads = 0);

enum class IdsRoute { Rotation, Sturm, FreeClosedForm };
enum class SpectralEdge { Lower, Upper };

std::string to_string(IdsRoute route);
std::string to_string(SpectralEdge side);

struct IdsCurvePoint {
    double E = 0.0;
    IdsValue ids;
};

struct IdsCurve {
    IdsRoute route = IdsRoute::Sturm;
    std::vector<IdsCurvePoint> points;
    uint64_t seed = 0;
    uint64_t n_or_volume = 0;
    int replicates_or_realizations = 0;
};

IdsCurve ids_curve(const AndersonModel& model, IdsRoute route, std::span<const double> e_grid,
                   const IdsOrbitParams& orbit, int volume, int realizations, int threads = 0);

// Edge-normalized rotation number per grid point:
//   lower edge: rho~(eps) = k(E_- + eps); upper edge: rho~(eps) = 1 - k(E_+ - eps).
struct EdgeScanPoint {
    double eps = 0.0;
    double rho_tilde = 0.0;
    double stderr_ = 0.0;
    bool resolved = true;
    double log_log_ratio = 0.0; // ln(-ln rho~)/ln eps, the Lifshitz functional
    double log_log_ratio_stderr = 0.0;
};

struct EdgeScanResult {
    SpectralEdge side = SpectralEdge::Lower;
    IdsRoute route = IdsRoute::Sturm;
    std::vector<EdgeScanPoint> points;
    ExponentFit fit; // over the resolved points
};

EdgeScanResult edge_scan(const AndersonModel& model, SpectralEdge side, IdsRoute route,
                         std::span<const double> eps_grid, const IdsOrbitParams& orbit, int volume,
                         int realizations, int threads = 0);

// Runs the generic assumption verifier on the induced edge family over
// |eps| <= r (r in (0, 1/2)) and additionally requires the quadratic case
// k_hat = 1 and the (M1)/(M2) checks on the shifted disorder.
AssumptionReport verify_anderson_hypotheses(const AndersonModel& model, double r);

} // namespace circlift
