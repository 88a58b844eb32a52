#include "objective.hpp"

#include <algorithm>

namespace ranopt {

namespace {

void check_point(const std::vector<double>& a) {
    if (a.empty()) fail(ErrorCode::InvalidArgument, "objective needs dimension >= 1");
    for (double v : a)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "anchor entry not finite");
}

double sign_or_zero(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

} // namespace

Objective abs_deviation(std::vector<double> a) {
    check_point(a);
    Objective f;
    f.dim = static_cast<int>(a.size());
    f.kind = ObjectiveKind::AbsDeviation;
    f.separable = true;
    f.bound = 1.0;
    f.anchor = a;
    f.eval = [a](std::span<const double> z) {
        double sum = 0.0;
        for (size_t k = 0; k < a.size(); ++k) sum += std::abs(z[k] - a[k]);
        return sum;
    };
    f.subgrad = [a](std::span<const double> z) {
        std::vector<double> g(a.size());
        for (size_t k = 0; k < a.size(); ++k) g[k] = sign_or_zero(z[k] - a[k]);
        return g;
    };
    return f;
}

Objective huber(std::vector<double> a, double delta) {
    check_point(a);
    if (!(delta > 0.0)) fail(ErrorCode::DeltaNonpositive, "huber delta must be positive");
    Objective f;
    f.dim = static_cast<int>(a.size());
    f.kind = ObjectiveKind::Huber;
    f.separable = true;
    f.bound = delta;
    f.anchor = a;
    f.eval = [a, delta](std::span<const double> z) {
        double sum = 0.0;
        for (size_t k = 0; k < a.size(); ++k) {
            double e = std::abs(z[k] - a[k]);
            sum += e <= delta ? 0.5 * e * e : delta * e - 0.5 * delta * delta;
        }
        return sum;
    };
    f.subgrad = [a, delta](std::span<const double> z) {
        std::vector<double> g(a.size());
        for (size_t k = 0; k < a.size(); ++k)
            g[k] = std::clamp(z[k] - a[k], -delta, delta);
        return g;
    };
    return f;
}

Objective max_affine(std::vector<std::vector<double>> slopes, std::vector<double> offsets) {
    if (slopes.empty() || slopes.size() != offsets.size())
        fail(ErrorCode::EmptyPieces, "max_affine needs matching non-empty piece lists");
    size_t m = slopes[0].size();
    if (m == 0) fail(ErrorCode::InvalidArgument, "max_affine needs dimension >= 1");
    for (const auto& s : slopes)
        if (s.size() != m) fail(ErrorCode::DimensionMismatch, "max_affine slope lengths differ");

    Objective f;
    f.dim = static_cast<int>(m);
    f.kind = ObjectiveKind::MaxAffine;
    f.separable = false;
    for (const auto& s : slopes) {
        double worst = 0.0;
        for (double v : s) worst = std::max(worst, std::abs(v));
        f.bound = std::max(f.bound, worst);
    }
    auto piece_value = [](const std::vector<double>& slope, double offset,
                          std::span<const double> z) {
        double v = offset;
        for (size_t k = 0; k < slope.size(); ++k) v += slope[k] * z[k];
        return v;
    };
    f.eval = [slopes, offsets, piece_value](std::span<const double> z) {
        double best = piece_value(slopes[0], offsets[0], z);
        for (size_t p = 1; p < slopes.size(); ++p)
            best = std::max(best, piece_value(slopes[p], offsets[p], z));
        return best;
    };
    f.subgrad = [slopes, offsets, piece_value](std::span<const double> z) {
        size_t argmax = 0;
        double best = piece_value(slopes[0], offsets[0], z);
        for (size_t p = 1; p < slopes.size(); ++p) {
            double v = piece_value(slopes[p], offsets[p], z);
            if (v > best) { // strict, so ties keep the lowest index
                best = v;
                argmax = p;
            }
        }
        return slopes[argmax];
    };
    return f;
}

ObjectiveCheck validate_objective(const Objective& f, int samples, double box_halfwidth,
                                  Pcg32& rng) {
    ObjectiveCheck report;
    int m = f.dim;
    auto draw = [&] {
        std::vector<double> z(m);
        for (double& v : z) v = (2.0 * rng.next_double() - 1.0) * box_halfwidth;
        return z;
    };
    for (int s = 0; s < samples; ++s) {
        std::vector<double> x = draw(), y = draw();
        double theta = rng.next_double();
        std::vector<double> mid(m);
        for (int k = 0; k < m; ++k) mid[k] = theta * x[k] + (1.0 - theta) * y[k];
        report.max_convexity_violation =
            std::max(report.max_convexity_violation,
                     f.eval(mid) - (theta * f.eval(x) + (1.0 - theta) * f.eval(y)));

        std::vector<double> g = f.subgrad(y);
        double inner = 0.0, worst = 0.0;
        for (int k = 0; k < m; ++k) {
            inner += g[k] * (x[k] - y[k]);
            worst = std::max(worst, std::abs(g[k]));
        }
        report.max_subgrad_violation =
            std::max(report.max_subgrad_violation, inner - (f.eval(x) - f.eval(y)));
        report.max_bound_violation = std::max(report.max_bound_violation, worst - f.bound);
    }
    return report;
}

StepSchedule make_schedule(double K, double beta, std::int64_t t0) {
    if (!(K > 0.0)) fail(ErrorCode::KNonpositive, "schedule constant K must be positive");
    if (!(beta > 0.5 && beta <= 1.0))
        fail(ErrorCode::BetaOutOfRange, "beta must lie in (1/2, 1]");
    if (t0 < 1) fail(ErrorCode::InvalidArgument, "t0 must be >= 1");
    return StepSchedule{K, beta, t0};
}

} // namespace ranopt
