#include "circlift/lift_family.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "circlift/anderson.hpp"
#include "circlift/errors.hpp"

namespace circlift {

bool ParamBox::contains(double E, std::span<const double> y) const {
    if (E < e_lo || E > e_hi) return false;
    return contains_y(y);
}

bool ParamBox::contains_y(std::span<const double> y) const {
    if (y.size() != y_lo.size()) return false;
    for (std::size_t j = 0; j < y.size(); ++j)
        if (y[j] < y_lo[j] || y[j] > y_hi[j]) return false;
    return true;
}

ModelMap::ModelMap(double amplitude) : amplitude_(amplitude) {}

std::string ModelMap::name() const {
    std::ostringstream os;
    os << "model";
    if (amplitude_ != 0.2) os << "[amplitude=" << amplitude_ << "]";
    return os.str();
}

ParamBox ModelMap::domain_box() const { return {-1.0, 1.0, {0.0}, {1.0}}; }

ParamBox ModelMap::certified_box() const { return {-0.5, 0.5, {0.0}, {0.15}}; }

double ModelMap::eval(double E, std::span<const double> y, double x) const {
    const double s = std::sin(M_PI * x);
    return x + amplitude_ * s * s + E - y[0];
}

void ModelMapConfig::validate() const {
    if (!(amplitude > 0.0 && amplitude < 0.5))
        throw ValidationError("model map: amplitude must lie in (0, 1/2)");
}

std::shared_ptr<const LiftFamily> ModelMapConfig::build() const {
    validate();
    return std::make_shared<ModelMap>(amplitude);
}

RigidRotation::RigidRotation(double alpha) : alpha_(alpha) {}

std::string RigidRotation::name() const {
    std::ostringstream os;
    os << "rigid[alpha=" << alpha_ << "]";
    return os.str();
}

ParamBox RigidRotation::domain_box() const { return {-1.0, 1.0, {0.0}, {1.0}}; }

ParamBox RigidRotation::certified_box() const { return {-0.5, 0.5, {0.0}, {0.15}}; }

double RigidRotation::eval(double E, std::span<const double> y, double x) const { return x + alpha_ + E - y[0]; }

FamilyCatalog::FamilyCatalog() {
    register_family("model", [](const nlohmann::json& params) {
        ModelMapConfig cfg;
        cfg.amplitude = params.value("amplitude", 0.2);
        return cfg.build();
    });
    register_family("rigid", [](const nlohmann::json& params) -> std::shared_ptr<const LiftFamily> {
        return std::make_shared<RigidRotation>(params.value("alpha", 0.0));
    });
    register_family("anderson", [](const nlohmann::json& params) -> std::shared_ptr<const LiftFamily> {
        if (!params.contains("mu")) throw ValidationError("anderson family: needs a \"mu\" potential spec");
        double r = params.value("r", 0.1);
        return std::make_shared<AndersonLift>(AndersonModel::from_json(params.at("mu")), r);
    });
}

FamilyCatalog& FamilyCatalog::instance() {
    static FamilyCatalog catalog;
    return catalog;
}

void FamilyCatalog::register_family(const std::string& name, Factory factory) {
    for (auto& [existing, f] : factories_)
        if (existing == name) {
            f = std::move(factory);
            return;
        }
    factories_.emplace_back(name, std::move(factory));
}

std::shared_ptr<const LiftFamily> FamilyCatalog::make(const nlohmann::json& spec) const {
    if (!spec.is_object() || !spec.contains("name"))
        throw ValidationError("family spec: need an object with a \"name\"");
    const std::string name = spec.at("name").get<std::string>();
    nlohmann::json params = spec;
    params.erase("name");
    for (const auto& [n, factory] : factories_)
        if (n == name) return factory(params);
    throw ValidationError("family spec: unknown family \"" + name + "\"");
}

std::vector<std::string> FamilyCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(factories_.size());
    for (const auto& [n, f] : factories_) out.push_back(n);
    return out;
}

double eval_lift(const LiftFamily& family, double E, std::span<const double> y, double x) {
    if (static_cast<int>(y.size()) != family.disorder_dim())
        throw ValidationError(family.name() + ": letter dimension mismatch");
    if (!family.domain_box().contains(E, y)) {
        std::ostringstream os;
        os << family.name() << ": parameters (E=" << E << ", y=(";
        for (std::size_t j = 0; j < y.size(); ++j) os << (j ? "," : "") << y[j];
        os << ")) outside the family's domain box";
        throw ValidationError(os.str());
    }
    return family.eval(E, y, x);
}

namespace {

// One reduced step: chi in [0,1) plus winding counter. Equivariance makes this
// the same lift value as stepping the absolute coordinate, without feeding
// huge arguments to the trig inside eval.
struct ReducedOrbit {
    double chi;
    int64_t winding = 0;

    explicit ReducedOrbit(double x0) {
        double f = std::floor(x0);
        chi = x0 - f;
        winding = static_cast<int64_t>(f);
    }

    void step(const LiftFamily& family, double E, std::span<const double> y) {
        double next = family.eval(E, y, chi);
        if (!std::isfinite(next))
            throw std::overflow_error(family.name() + ": non-finite lift value during orbit iteration");
        chi = next;
        while (chi >= 1.0) {
            chi -= 1.0;
            ++winding;
        }
        while (chi < 0.0) {
            chi += 1.0;
            --winding;
        }
    }

    double lift() const { return static_cast<double>(winding) + chi; }
};

} // namespace

OrbitResult iterate_orbit(const LiftFamily& family, double E, const Word& word, double x0, bool trace) {
    if (word.dimension() != family.disorder_dim() && word.size() > 0)
        throw ValidationError(family.name() + ": word dimension mismatch");
    const ParamBox box = family.domain_box();
    for (std::size_t i = 0; i < word.size(); ++i)
        if (!box.contains(E, word.letter(i)))
            throw ValidationError(family.name() + ": word letter outside the family's domain box");

    OrbitResult out;
    out.x0 = x0;
    out.steps = word.size();
    ReducedOrbit orbit(x0);
    if (trace) {
        out.trajectory.reserve(word.size() + 1);
        out.trajectory.push_back(x0);
    }
    for (std::size_t i = 0; i < word.size(); ++i) {
        orbit.step(family, E, word.letter(i));
        if (trace) out.trajectory.push_back(orbit.lift());
    }
    out.final_lift = orbit.lift();
    out.windings = static_cast<int64_t>(std::floor(out.final_lift - x0));
    return out;
}

OrbitResult iterate_orbit_streamed(const LiftFamily& family, double E, const DisorderMeasure& measure, uint64_t seed,
                                   uint64_t stream, std::size_t n, double x0) {
    const int d = family.disorder_dim();
    if (measure.dimension() != d) throw ValidationError(family.name() + ": measure dimension mismatch");
    CounterRng rng(seed, stream);
    std::vector<double> letter(d);
    OrbitResult out;
    out.x0 = x0;
    out.steps = n;
    ReducedOrbit orbit(x0);
    for (std::size_t i = 0; i < n; ++i) {
        measure.sample_letter(rng, i, letter);
        orbit.step(family, E, letter);
    }
    out.final_lift = orbit.lift();
    out.windings = static_cast<int64_t>(std::floor(out.final_lift - x0));
    return out;
}

} // namespace circlift
