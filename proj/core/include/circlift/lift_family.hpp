#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "circlift/disorder.hpp"

namespace circlift {

// Closed box in (E, y)-parameter space.
struct ParamBox {
    double e_lo = 0.0, e_hi = 0.0;
    std::vector<double> y_lo, y_hi;

    bool contains(double E, std::span<const double> y) const;
    bool contains_y(std::span<const double> y) const;
};

// A parametrized family of circle-map lifts G_{E,y}: R -> R with
// G_{E,y}(x + 1) = G_{E,y}(x) + 1, strictly increasing in x, and normalized
// so the unperturbed map fixes 0. `domain_box` is where eval is defined;
// `certified_box` is the subbox on which the standing assumptions are meant
// to hold and where the verifier samples.
class LiftFamily {
public:
    virtual ~LiftFamily() = default;

    virtual std::string name() const = 0;
    virtual int tangency_k() const = 0;    // declared order parameter; fixed point has order 2k
    virtual int disorder_dim() const = 0;
    virtual ParamBox domain_box() const = 0;
    virtual ParamBox certified_box() const = 0;
    virtual double x_star() const = 0;     // reference point in (-1, 0)
    virtual double eval(double E, std::span<const double> y, double x) const = 0;
};

// The model example: G_{E,y}(x) = x + amplitude * sin^2(pi x) + E - y_1.
class ModelMap final : public LiftFamily {
public:
    // Unvalidated constructor; assumption-failure tests build broken variants.
    explicit ModelMap(double amplitude = 0.2);

    std::string name() const override;
    int tangency_k() const override { return 1; }
    int disorder_dim() const override { return 1; }
    ParamBox domain_box() const override;
    ParamBox certified_box() const override;
    double x_star() const override { return -0.5; }
    double eval(double E, std::span<const double> y, double x) const override;

    double amplitude() const { return amplitude_; }

private:
    double amplitude_;
};

struct ModelMapConfig {
    double amplitude = 0.2;

    // amplitude in (0, 1/2) keeps the configured map a diffeomorphism lift
    void validate() const;
    std::shared_ptr<const LiftFamily> build() const;
};

// G_{E,y}(x) = x + alpha + E - y_1. With alpha = 0 this is the rigid
// translation family (no even tangency order); with alpha > 0 a rigid
// rotation.
class RigidRotation final : public LiftFamily {
public:
    explicit RigidRotation(double alpha);

    std::string name() const override;
    int tangency_k() const override { return 1; }
    int disorder_dim() const override { return 1; }
    ParamBox domain_box() const override;
    ParamBox certified_box() const override;
    double x_star() const override { return -0.5; }
    double eval(double E, std::span<const double> y, double x) const override;

private:
    double alpha_;
};

// Families addressable by name from configs and the CLI.
class FamilyCatalog {
public:
    using Factory = std::function<std::shared_ptr<const LiftFamily>(const nlohmann::json& params)>;

    static FamilyCatalog& instance();

    void register_family(const std::string& name, Factory factory);
    std::shared_ptr<const LiftFamily> make(const nlohmann::json& spec) const; // {"name": ..., ...params}
    std::vector<std::string> names() const;

private:
    FamilyCatalog();
    std::vector<std::pair<std::string, Factory>> factories_;
};

// Box-checked single evaluation of the lift.
double eval_lift(const LiftFamily& family, double E, std::span<const double> y, double x);

struct OrbitResult {
    double x0 = 0.0;
    double final_lift = 0.0;
    int64_t windings = 0;            // floor(final - x0)
    std::size_t steps = 0;
    std::vector<double> trajectory;  // filled only when traced; trajectory[0] == x0
};

// Applies G_{E,w_n} o ... o G_{E,w_1} to x0. Iteration runs on the reduced
// coordinate (winding, fractional part), which keeps trig arguments small on
// long orbits; by equivariance the result is the same lift value.
OrbitResult iterate_orbit(const LiftFamily& family, double E, const Word& word, double x0, bool trace = false);

// Streaming variant for long orbits: letters are drawn on the fly from the
// measure (letter i of stream (seed, stream)), identical to the letters
// sample_word would produce.
OrbitResult iterate_orbit_streamed(const LiftFamily& family, double E, const DisorderMeasure& measure,
                                   uint64_t seed, uint64_t stream, std::size_t n, double x0);

} // namespace circlift
