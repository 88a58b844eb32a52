#include "util.hpp"

#include <cmath>

#include "errors.hpp"

namespace ranopt {

MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    size_t n = xs.size();
    if (n != ys.size() || n < 2)
        fail(ErrorCode::InvalidArgument, "line fit needs >= 2 paired points");
    double xm = 0.0, ym = 0.0;
    for (size_t i = 0; i < n; ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
        syy += (ys[i] - ym) * (ys[i] - ym);
    }
    if (sxx == 0.0) fail(ErrorCode::InvalidArgument, "degenerate abscissae in line fit");

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double ssr = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ssr += resid * resid;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    if (n > 2) fit.slope_se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return fit;
}

} // namespace ranopt
