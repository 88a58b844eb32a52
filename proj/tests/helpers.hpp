#ifndef RANOPT_TEST_HELPERS_HPP
#define RANOPT_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "ranopt/chains.hpp"
#include "ranopt/matrix.hpp"
#include "ranopt/rng.hpp"

namespace ranopt::test {

/// i.i.d. pick between two doubly stochastic matrices, deliberately without
/// a closed-form conditional expectation, to exercise Monte Carlo fallbacks.
class OpaquePairChain final : public ChainGenerator {
public:
    OpaquePairChain(StochasticMatrix a, StochasticMatrix b, std::uint64_t seed,
                    bool resamplable = true)
        : ChainGenerator(1, seed, 99), a_(std::move(a)), b_(std::move(b)),
          resamplable_(resamplable) {}

    int n() const override { return a_.dim(); }
    std::unique_ptr<ChainGenerator> clone() const override {
        return std::make_unique<OpaquePairChain>(*this);
    }
    bool analytic_cond_exp() const override { return false; }
    bool supports_conditional_resampling() const override { return resamplable_; }
    std::optional<StochasticMatrix> cond_exp_ahead(int) const override {
        return std::nullopt;
    }

protected:
    ChainStep do_step(Pcg32& rng) override {
        return {time() + 1, rng.coin() ? a_ : b_, std::nullopt};
    }

private:
    StochasticMatrix a_, b_;
    bool resamplable_;
};

// Independent re-implementations of the matrix functionals, kept separate
// from the library so property tests check against a second route.
inline double diam_oracle(const StochasticMatrix& a) {
    double worst = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < a.dim(); ++j) {
            double sum = 0.0;
            for (int l = 0; l < a.dim(); ++l) sum += std::abs(a(i, l) - a(j, l));
            worst = std::max(worst, 0.5 * sum);
        }
    }
    return worst;
}

inline double mixing_oracle(const StochasticMatrix& a) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < a.dim(); ++j) {
            double sum = 0.0;
            for (int l = 0; l < a.dim(); ++l) sum += std::min(a(i, l), a(j, l));
            best = std::min(best, sum);
        }
    }
    return best;
}

/// Random row-stochastic matrix mixing dense rows, sparse rows, and
/// near-deterministic rows so the property suite hits zero entries and
/// spiky supports as well as smooth ones.
inline StochasticMatrix random_stochastic(int n, Pcg32& rng) {
    std::vector<double> entries(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        int style = static_cast<int>(rng.next_below(3));
        double sum = 0.0;
        if (style == 0) { // dense exponential weights
            for (int j = 0; j < n; ++j) {
                double e = -std::log(1.0 - rng.next_double());
                entries[static_cast<size_t>(i) * n + j] = e;
                sum += e;
            }
        } else if (style == 1) { // sparse support
            int support = 1 + static_cast<int>(rng.next_below(static_cast<uint32_t>(n)));
            for (int s = 0; s < support; ++s) {
                int j = static_cast<int>(rng.next_below(static_cast<uint32_t>(n)));
                double e = rng.next_double() + 1e-3;
                entries[static_cast<size_t>(i) * n + j] += e;
                sum += e;
            }
        } else { // near-unit row
            int j = static_cast<int>(rng.next_below(static_cast<uint32_t>(n)));
            entries[static_cast<size_t>(i) * n + j] = 1.0;
            sum = 1.0;
        }
        for (int j = 0; j < n; ++j) entries[static_cast<size_t>(i) * n + j] /= sum;
    }
    return StochasticMatrix::make(n, std::move(entries));
}

inline StateBlock random_state(int n, int m, Pcg32& rng, double halfwidth = 5.0) {
    std::vector<double> values(static_cast<size_t>(n) * m);
    for (double& v : values) v = (2.0 * rng.next_double() - 1.0) * halfwidth;
    return StateBlock(n, m, std::move(values));
}

inline std::vector<double> random_stochastic_vector(int n, Pcg32& rng) {
    std::vector<double> pi(static_cast<size_t>(n));
    double sum = 0.0;
    for (double& v : pi) {
        v = -std::log(1.0 - rng.next_double());
        sum += v;
    }
    for (double& v : pi) v /= sum;
    return pi;
}

} // namespace ranopt::test

#endif
