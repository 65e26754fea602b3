#include "circlift/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "circlift/assumptions.hpp"
#include "circlift/errors.hpp"
#include "circlift/lift_family.hpp"

namespace circlift {

std::string to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::UniformBox: return "uniform-box";
        case MeasureKind::PowerLawBox: return "power-law-box";
        case MeasureKind::BernoulliProduct: return "bernoulli-product";
        case MeasureKind::PushforwardShift: return "pushforward-shift";
    }
    return "?";
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

} // namespace

DisorderMeasure DisorderMeasure::uniform_box(int d, std::vector<double> max) {
    require(d >= 1, "uniform-box: d must be >= 1");
    require(static_cast<int>(max.size()) == d, "uniform-box: need one support bound per coordinate");
    for (double m : max) require(m > 0, "uniform-box: support bounds must be positive");
    DisorderMeasure mu;
    mu.kind_ = MeasureKind::UniformBox;
    mu.d_ = d;
    mu.max_ = std::move(max);
    double C = 1.0;
    for (double m : mu.max_) C /= m;
    mu.density_ = {C, static_cast<double>(d)};
    return mu;
}

DisorderMeasure DisorderMeasure::power_law_box(int d, std::vector<double> max, std::vector<double> exponent) {
    require(d >= 1, "power-law-box: d must be >= 1");
    require(static_cast<int>(max.size()) == d && static_cast<int>(exponent.size()) == d,
            "power-law-box: need one bound and one exponent per coordinate");
    for (double m : max) require(m > 0, "power-law-box: support bounds must be positive");
    for (double t : exponent) require(t > 0, "power-law-box: exponents must be positive");
    DisorderMeasure mu;
    mu.kind_ = MeasureKind::PowerLawBox;
    mu.d_ = d;
    mu.max_ = std::move(max);
    mu.exponent_ = std::move(exponent);
    double C = 1.0, l = 0.0;
    for (int j = 0; j < d; ++j) {
        C *= std::pow(mu.max_[j], -mu.exponent_[j]);
        l += mu.exponent_[j];
    }
    mu.density_ = {C, l};
    return mu;
}

DisorderMeasure DisorderMeasure::bernoulli_product(int d, std::vector<double> atoms, std::vector<double> weights) {
    require(d >= 1, "bernoulli-product: d must be >= 1");
    require(!atoms.empty() && atoms.size() == weights.size(), "bernoulli-product: atoms and weights must pair up");
    for (double a : atoms) require(a >= 0, "bernoulli-product: atoms must be >= 0");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0, "bernoulli-product: weights must be >= 0");
        total += w;
    }
    require(std::abs(total - 1.0) < 1e-12, "bernoulli-product: weights must sum to 1");
    // sort atoms ascending, weights along
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });
    DisorderMeasure mu;
    mu.kind_ = MeasureKind::BernoulliProduct;
    mu.d_ = d;
    for (std::size_t i : order) {
        mu.atoms_.push_back(atoms[i]);
        mu.weights_.push_back(weights[i]);
    }
    mu.cum_weights_.resize(mu.weights_.size());
    std::partial_sum(mu.weights_.begin(), mu.weights_.end(), mu.cum_weights_.begin());
    mu.cum_weights_.back() = 1.0;
    mu.max_.assign(d, mu.atoms_.back());
    // an atom at zero carries its weight into every [0, eps]; without one the
    // declared constants reflect the first atom's position
    double w0 = mu.atoms_.front() == 0.0 ? mu.weights_.front() : 0.0;
    mu.density_ = {w0 > 0 ? std::pow(w0, d) : 0.0, 1.0};
    return mu;
}

DisorderMeasure DisorderMeasure::pushforward_shift(DisorderMeasure base, std::vector<double> shift) {
    require(static_cast<int>(shift.size()) == base.d_, "pushforward-shift: need one shift per coordinate");
    for (int j = 0; j < base.d_; ++j)
        require(base.support_min(j) - shift[j] >= 0, "pushforward-shift: shifted support must stay in [0,inf)");
    DisorderMeasure mu;
    mu.kind_ = MeasureKind::PushforwardShift;
    mu.d_ = base.d_;
    mu.max_.resize(base.d_);
    for (int j = 0; j < base.d_; ++j) mu.max_[j] = base.support_max(j) - shift[j];
    mu.shift_ = std::move(shift);
    mu.density_ = base.density_;
    mu.base_ = std::make_shared<DisorderMeasure>(std::move(base));
    return mu;
}

double DisorderMeasure::support_max(int j) const { return max_.at(j); }

double DisorderMeasure::support_min(int j) const {
    switch (kind_) {
        case MeasureKind::BernoulliProduct: return atoms_.front();
        case MeasureKind::PushforwardShift: return base_->support_min(j) - shift_[j];
        default: return 0.0;
    }
}

double DisorderMeasure::coord_cdf(int j, double t) const {
    switch (kind_) {
        case MeasureKind::UniformBox:
            return std::clamp(t / max_[j], 0.0, 1.0);
        case MeasureKind::PowerLawBox:
            return t <= 0 ? 0.0 : std::pow(std::clamp(t / max_[j], 0.0, 1.0), exponent_[j]);
        case MeasureKind::BernoulliProduct: {
            double acc = 0.0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i] <= t) acc += weights_[i];
            return acc;
        }
        case MeasureKind::PushforwardShift:
            return base_->coord_cdf(j, t + shift_[j]);
    }
    return 0.0;
}

double DisorderMeasure::coord_upper_tail(int j, double t) const {
    switch (kind_) {
        case MeasureKind::BernoulliProduct: {
            double acc = 0.0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i] >= t) acc += weights_[i];
            return acc;
        }
        case MeasureKind::PushforwardShift:
            return base_->coord_upper_tail(j, t + shift_[j]);
        default:
            return 1.0 - coord_cdf(j, t); // continuous kinds
    }
}

double DisorderMeasure::box_probability(double eps) const {
    double p = 1.0;
    for (int j = 0; j < d_; ++j) p *= coord_cdf(j, eps);
    return p;
}

bool DisorderMeasure::support_has_two_points() const {
    if (kind_ == MeasureKind::BernoulliProduct) {
        double first_live = -1.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (weights_[i] <= 0) continue;
            if (first_live < 0) first_live = atoms_[i];
            else if (atoms_[i] != first_live) return true;
        }
        return false;
    }
    if (kind_ == MeasureKind::PushforwardShift) return base_->support_has_two_points();
    for (int j = 0; j < d_; ++j)
        if (support_max(j) > support_min(j)) return true;
    return false;
}

DisorderMeasure::DensityCheck DisorderMeasure::verify_density_constants(std::span<const double> eps_values) const {
    DensityCheck check;
    double worst = 0.0;
    for (double eps : eps_values) {
        double claimed = density_.C * std::pow(eps, density_.l);
        double actual = box_probability(eps);
        double excess = claimed - actual;
        if (excess > worst) {
            worst = excess;
            check.worst_eps = eps;
            check.claimed = claimed;
            check.actual = actual;
        }
    }
    check.ok = worst <= 0.0;
    return check;
}

void DisorderMeasure::sample_letter(const CounterRng& rng, uint64_t letter_index, std::span<double> out) const {
    uint64_t base_index = letter_index * static_cast<uint64_t>(d_);
    switch (kind_) {
        case MeasureKind::UniformBox:
            for (int j = 0; j < d_; ++j) out[j] = max_[j] * rng.uniform01(base_index + j);
            return;
        case MeasureKind::PowerLawBox:
            for (int j = 0; j < d_; ++j)
                out[j] = max_[j] * std::pow(rng.uniform01(base_index + j), 1.0 / exponent_[j]);
            return;
        case MeasureKind::BernoulliProduct:
            for (int j = 0; j < d_; ++j) {
                double u = rng.uniform01(base_index + j);
                std::size_t i = std::lower_bound(cum_weights_.begin(), cum_weights_.end(), u) - cum_weights_.begin();
                out[j] = atoms_[std::min(i, atoms_.size() - 1)];
            }
            return;
        case MeasureKind::PushforwardShift:
            base_->sample_letter(rng, letter_index, out);
            for (int j = 0; j < d_; ++j) out[j] -= shift_[j];
            return;
    }
}

std::string DisorderMeasure::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "[d=" << d_;
    if (kind_ == MeasureKind::BernoulliProduct) {
        os << ",atoms=";
        for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? "|" : "") << atoms_[i] << "@" << weights_[i];
    } else {
        os << ",max=";
        for (int j = 0; j < d_; ++j) os << (j ? "|" : "") << max_[j];
    }
    os << "]";
    return os.str();
}

nlohmann::json DisorderMeasure::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    j["d"] = d_;
    switch (kind_) {
        case MeasureKind::UniformBox:
            j["max"] = max_;
            break;
        case MeasureKind::PowerLawBox:
            j["max"] = max_;
            j["exponent"] = exponent_;
            break;
        case MeasureKind::BernoulliProduct:
            j["atoms"] = atoms_;
            j["weights"] = weights_;
            break;
        case MeasureKind::PushforwardShift:
            j["base"] = base_->to_json();
            j["shift"] = shift_;
            break;
    }
    j["C"] = density_.C;
    j["l"] = density_.l;
    return j;
}

DisorderMeasure DisorderMeasure::from_json(const nlohmann::json& spec) {
    require(spec.is_object() && spec.contains("kind"), "measure spec: need an object with a \"kind\"");
    const std::string kind = spec.at("kind").get<std::string>();
    static const std::vector<std::string> known_keys = {"kind", "d", "max", "exponent", "atoms", "weights",
                                                        "base", "shift", "C", "l"};
    for (auto it = spec.begin(); it != spec.end(); ++it)
        require(std::find(known_keys.begin(), known_keys.end(), it.key()) != known_keys.end(),
                "measure spec: unknown key \"" + it.key() + "\"");
    int d = spec.value("d", 1);
    DisorderMeasure mu = [&] {
        if (kind == "uniform-box")
            return uniform_box(d, spec.at("max").get<std::vector<double>>());
        if (kind == "power-law-box")
            return power_law_box(d, spec.at("max").get<std::vector<double>>(),
                                 spec.at("exponent").get<std::vector<double>>());
        if (kind == "bernoulli-product")
            return bernoulli_product(d, spec.at("atoms").get<std::vector<double>>(),
                                     spec.at("weights").get<std::vector<double>>());
        if (kind == "pushforward-shift")
            return pushforward_shift(from_json(spec.at("base")), spec.at("shift").get<std::vector<double>>());
        throw ValidationError("measure spec: unknown kind \"" + kind + "\"");
    }();
    if (spec.contains("C") || spec.contains("l"))
        mu.set_density({spec.value("C", mu.density().C), spec.value("l", mu.density().l)});
    return mu;
}

Word Word::prefix(std::size_t n) const {
    Word w(d_, std::min(n, size()));
    std::copy_n(flat_.begin(), w.flat_.size(), w.flat_.begin());
    return w;
}

Word Word::suffix(std::size_t from) const {
    from = std::min(from, size());
    Word w(d_, size() - from);
    std::copy(flat_.begin() + from * d_, flat_.end(), w.flat_.begin());
    return w;
}

Word sample_word(const DisorderMeasure& measure, uint64_t seed, uint64_t stream, std::size_t n) {
    Word word(measure.dimension(), n);
    CounterRng rng(seed, stream);
    for (std::size_t i = 0; i < n; ++i) measure.sample_letter(rng, i, word.letter(i));
    return word;
}

bool is_good_block(const Word& block, double E, double b) {
    if (E <= 0) throw ValidationError("is_good_block: requires E > 0");
    const double threshold = b * E;
    for (std::size_t i = 0; i < block.size(); ++i)
        for (double y : block.letter(i))
            if (y < 0 || y > threshold) return false;
    return true;
}

BlockProbability good_block_probability(const DisorderMeasure& measure, double E, double b, int64_t N) {
    if (E <= 0 || b <= 0) throw ValidationError("good_block_probability: requires E > 0 and b > 0");
    if (N < 0) throw ValidationError("good_block_probability: requires N >= 0");
    BlockProbability out;
    const double per_letter = measure.box_probability(b * E);
    out.ln_value = per_letter > 0 ? N * std::log(per_letter) : (N == 0 ? 0.0 : -HUGE_VAL);
    out.value = std::exp(out.ln_value);
    const auto& dens = measure.density();
    double ln_bound_letter = std::log(dens.C) + dens.l * std::log(b * E);
    out.ln_analytic_lower = N == 0 ? 0.0 : N * ln_bound_letter;
    out.analytic_lower = std::exp(out.ln_analytic_lower);
    return out;
}

bool BadSet::contains(std::span<const double> letter) const {
    for (std::size_t j = 0; j < min_coord.size(); ++j)
        if (letter[j] < min_coord[j]) return false;
    return true;
}

double BadSet::probability(const DisorderMeasure& measure) const {
    double p = 1.0;
    for (std::size_t j = 0; j < min_coord.size(); ++j)
        p *= measure.coord_upper_tail(static_cast<int>(j), min_coord[j]);
    return p;
}

nlohmann::json BadSet::to_json() const { return nlohmann::json{{"min_coord", min_coord}}; }

BadSet BadSet::from_json(const nlohmann::json& spec) {
    return BadSet{spec.at("min_coord").get<std::vector<double>>()};
}

bool is_bad_block(const Word& block, const BadSet& bad) {
    for (std::size_t i = 0; i < block.size(); ++i)
        if (bad.contains(block.letter(i))) return true;
    return false;
}

BlockSpec BlockSpec::for_family(const LiftFamily& family, const DisorderMeasure& measure, const LocalBounds& bounds,
                                int64_t N, double corner_radius_fraction) {
    if (N < 1) throw ValidationError("BlockSpec: N must be >= 1");
    BlockSpec spec;
    spec.N = N;

    // largest power of two satisfying d * Gamma_y * b <= gamma_E / 2; the tiny
    // slack keeps exact powers of two from falling a rung on rounding noise
    const int d = family.disorder_dim();
    double cap = bounds.gamma_E / (2.0 * d * bounds.Gamma_y);
    double b = std::exp2(std::floor(std::log2(cap * (1 + 1e-9))));
    if (!(b > 0) || !std::isfinite(b)) throw ValidationError("BlockSpec: no admissible good threshold b");
    spec.b = b;

    // bad corner around the support max, with G_{0,y_hat}(eta) < -2 eta at the
    // corner itself and G_{0,y}(eta) < -eta kept at the worst (lowest) corner
    std::vector<double> y_hat(d);
    for (int j = 0; j < d; ++j) y_hat[j] = measure.support_max(j);
    double eta = 0.0;
    for (double cand = 0.01; cand > 1e-8; cand /= 2) {
        if (family.eval(0.0, y_hat, cand) < -2 * cand) {
            eta = cand;
            break;
        }
    }
    if (eta == 0.0)
        throw HypothesisError("BlockSpec: no eta <= 0.01 with G_{0,y_hat}(eta) < -2 eta; support max does not push back");
    double radius = corner_radius_fraction * measure.support_max(0);
    std::vector<double> corner(d);
    for (;;) {
        for (int j = 0; j < d; ++j) corner[j] = y_hat[j] - radius;
        if (family.eval(0.0, corner, eta) < -eta) break;
        radius /= 2;
        if (radius < 1e-12) throw HypothesisError("BlockSpec: bad corner collapsed before G_{0,y}(eta) < -eta held");
    }
    spec.eta = eta;
    spec.bad_set.min_coord = corner;
    spec.p1 = spec.bad_set.probability(measure);
    if (!(spec.p1 > 0 && spec.p1 <= 1)) throw HypothesisError("BlockSpec: bad-letter probability must be in (0, 1]");
    return spec;
}

} // namespace circlift
