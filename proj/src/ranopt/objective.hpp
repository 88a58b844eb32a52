#ifndef RANOPT_OBJECTIVE_HPP
#define RANOPT_OBJECTIVE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace ranopt {

enum class ObjectiveKind { AbsDeviation, Huber, MaxAffine, Custom };

/// Convex function with a value, a deterministic subgradient selection, and
/// a uniform linf subgradient bound. Subgradient choices at kinks are fixed
/// (0 at absolute-value kinks, lowest-index piece for max-affine) so runs
/// replay exactly.
struct Objective {
    std::function<double(std::span<const double>)> eval;
    std::function<std::vector<double>(std::span<const double>)> subgrad;
    double bound = 0.0; // L_i
    int dim = 0;        // m
    ObjectiveKind kind = ObjectiveKind::Custom;
    bool separable = false;        // sum of per-coordinate terms
    std::vector<double> anchor;    // abs/huber anchor, empty otherwise

    double operator()(std::span<const double> z) const { return eval(z); }
};

/// f(z) = sum_k |z_k - a_k|, L = 1. Subgradient is sign(z_k - a_k), 0 at kinks.
Objective abs_deviation(std::vector<double> a);

/// Coordinate-wise Huber loss around a: quadratic within delta, linear
/// outside; gradient clamps at +-delta, so L = delta.
Objective huber(std::vector<double> a, double delta);

/// f(z) = max_k (<slope_k, z> + offset_k); ties resolve to the lowest index.
Objective max_affine(std::vector<std::vector<double>> slopes, std::vector<double> offsets);

/// Sampled violations of the objective contract over a centered box.
struct ObjectiveCheck {
    double max_convexity_violation = 0.0;
    double max_subgrad_violation = 0.0;
    double max_bound_violation = 0.0;
    bool ok(double tol = 1e-9) const {
        return max_convexity_violation <= tol && max_subgrad_violation <= tol &&
               max_bound_violation <= tol;
    }
};
ObjectiveCheck validate_objective(const Objective& f, int samples, double box_halfwidth,
                                  Pcg32& rng);

/// alpha(t) = K t^{-beta} with beta in (1/2, 1], so the sequence is
/// non-summable with square-summable squares and alpha(t)/alpha(t+1) -> 1.
struct StepSchedule {
    double K = 1.0;
    double beta = 0.75;
    std::int64_t t0 = 1;

    double alpha(std::int64_t t) const {
        return K * std::pow(static_cast<double>(t), -beta);
    }
};

/// Errors: KNonpositive, BetaOutOfRange (beta <= 1/2 makes sum alpha^2
/// diverge; beta > 1 makes sum alpha converge).
StepSchedule make_schedule(double K, double beta, std::int64_t t0 = 1);

} // namespace ranopt

#endif
