#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "circlift/rng.hpp"

namespace circlift {

enum class MeasureKind { UniformBox, PowerLawBox, BernoulliProduct, PushforwardShift };

std::string to_string(MeasureKind kind);

// Declared density-at-zero constants: mu([0,eps]^d) >= C eps^l for small eps.
struct DensityConstants {
    double C = 1.0;
    double l = 1.0;
};

// A sampleable product probability measure on [0, M_1] x ... x [0, M_d].
// Immutable after construction; safe to share across workers. All kinds carry
// exact per-coordinate CDFs, so box probabilities are closed-form.
class DisorderMeasure {
public:
    static DisorderMeasure uniform_box(int d, std::vector<double> max);
    static DisorderMeasure power_law_box(int d, std::vector<double> max, std::vector<double> exponent);
    // Same atom set in every coordinate.
    static DisorderMeasure bernoulli_product(int d, std::vector<double> atoms, std::vector<double> weights);
    // Pushforward of `base` under y -> y - shift. Support must stay in [0,inf)^d.
    static DisorderMeasure pushforward_shift(DisorderMeasure base, std::vector<double> shift);

    int dimension() const { return d_; }
    MeasureKind kind() const { return kind_; }
    double support_max(int j) const;
    double support_min(int j) const;
    const DensityConstants& density() const { return density_; }
    void set_density(DensityConstants c) { density_ = c; }

    // P(y_j <= t), exact.
    double coord_cdf(int j, double t) const;
    // P(y_j >= t), exact (closed upper set; atoms at t count).
    double coord_upper_tail(int j, double t) const;
    // mu([0, eps]^d), exact.
    double box_probability(double eps) const;

    // (M1): compact support in [0,inf)^d with at least two points.
    bool support_has_two_points() const;

    // (M2) audit: the declared (C, l) must never overstate the exact CDF.
    struct DensityCheck {
        bool ok = true;
        double worst_eps = 0.0;
        double claimed = 0.0;
        double actual = 0.0;
    };
    DensityCheck verify_density_constants(std::span<const double> eps_values) const;

    // Letter i, coordinate j consumes counter index i*d + j, so words have the
    // prefix property and letters are addressable at random.
    void sample_letter(const CounterRng& rng, uint64_t letter_index, std::span<double> out) const;

    std::string describe() const;
    nlohmann::json to_json() const;
    static DisorderMeasure from_json(const nlohmann::json& spec);

private:
    DisorderMeasure() = default;

    MeasureKind kind_ = MeasureKind::UniformBox;
    int d_ = 1;
    std::vector<double> max_;        // per-coordinate support bound (after shift)
    std::vector<double> exponent_;   // power-law only
    std::vector<double> atoms_;      // bernoulli only
    std::vector<double> weights_;    // bernoulli only
    std::vector<double> cum_weights_;
    std::vector<double> shift_;      // pushforward only
    std::shared_ptr<const DisorderMeasure> base_; // pushforward only
    DensityConstants density_;
};

// A length-n word of i.i.d. letters, stored flat.
class Word {
public:
    Word() = default;
    Word(int d, std::size_t n) : d_(d), flat_(static_cast<std::size_t>(d) * n) {}

    int dimension() const { return d_; }
    std::size_t size() const { return d_ ? flat_.size() / d_ : 0; }
    std::span<const double> letter(std::size_t i) const { return {flat_.data() + i * d_, static_cast<std::size_t>(d_)}; }
    std::span<double> letter(std::size_t i) { return {flat_.data() + i * d_, static_cast<std::size_t>(d_)}; }
    Word prefix(std::size_t n) const;
    Word suffix(std::size_t from) const;

private:
    int d_ = 0;
    std::vector<double> flat_;
};

// Deterministic given (measure, seed, stream, n); extending n extends the word
// without changing earlier letters.
Word sample_word(const DisorderMeasure& measure, uint64_t seed, uint64_t stream, std::size_t n);
inline Word sample_word(const DisorderMeasure& measure, uint64_t seed, std::size_t n) {
    return sample_word(measure, seed, 0, n);
}

// True iff every letter of the block lies in [0, b*E]^d. Requires E > 0.
bool is_good_block(const Word& block, double E, double b);

struct BlockProbability {
    double value = 0.0;          // exact mu([0,bE]^d)^N
    double analytic_lower = 0.0; // (C (bE)^l)^N from the declared density constants
    double ln_value = 0.0;
    double ln_analytic_lower = 0.0;
};
BlockProbability good_block_probability(const DisorderMeasure& measure, double E, double b, int64_t N);

// Bad set U = {y : y_j >= min_coord[j] for every j}; a coordinate upper corner.
// A half-space in coordinate j is the special case where the other thresholds
// are zero.
struct BadSet {
    std::vector<double> min_coord;

    bool contains(std::span<const double> letter) const;
    // p1 = mu(U), exact for product measures.
    double probability(const DisorderMeasure& measure) const;
    nlohmann::json to_json() const;
    static BadSet from_json(const nlohmann::json& spec);
};

// True iff some letter of the block lies in U.
bool is_bad_block(const Word& block, const BadSet& bad);

struct LocalBounds; // assumptions.hpp
class LiftFamily;   // lift_family.hpp

// Block machinery tied to a family: N, the good threshold b, and the bad set.
struct BlockSpec {
    int64_t N = 1;
    double b = 0.0;
    BadSet bad_set;
    double p1 = 0.0;
    double eta = 0.0; // margin point: G_{0,y_hat}(eta) < -2 eta

    // b defaults to the largest power of two with d * Gamma_y * b <= gamma_E / 2.
    // The bad set is an upper corner around the support max y_hat, shrunk until
    // G_{0,y}(eta) < -eta holds at its worst corner.
    static BlockSpec for_family(const LiftFamily& family, const DisorderMeasure& measure,
                                const LocalBounds& bounds, int64_t N, double corner_radius_fraction = 0.125);
};

} // namespace circlift
