#ifndef RANOPT_MATRIX_HPP
#define RANOPT_MATRIX_HPP

#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ranopt {

// Tolerance for identities that hold in exact arithmetic.
inline constexpr double kExactTol = 1e-12;
// Tolerance for row-sum drift accumulated over long matrix products;
// rows inside this band are renormalized exactly, anything worse is an error.
inline constexpr double kDriftTol = 1e-9;

/// Dense row-stochastic matrix: every entry nonnegative, every row summing
/// to one within kExactTol. Immutable after construction.
class StochasticMatrix {
public:
    /// Validates and renormalizes a square array (row-major).
    /// Errors: NonSquare, NegativeEntry, RowSumOutOfTolerance.
    static StochasticMatrix make(int n, std::vector<double> entries);
    static StochasticMatrix make(const std::vector<std::vector<double>>& rows);

    static StochasticMatrix identity(int n);
    /// The rank-one averaging projector (1/n) e e^T.
    static StochasticMatrix uniform_mixing(int n);

    int dim() const { return n_; }
    double operator()(int i, int j) const { return entries_[static_cast<size_t>(i) * n_ + j]; }
    std::span<const double> row(int i) const {
        return {entries_.data() + static_cast<size_t>(i) * n_, static_cast<size_t>(n_)};
    }
    const std::vector<double>& data() const { return entries_; }

    bool is_doubly_stochastic(double tol = kExactTol) const;
    /// Largest |column sum - 1| over all columns.
    double max_column_sum_deviation() const;

    bool operator==(const StochasticMatrix& other) const = default;

private:
    StochasticMatrix(int n, std::vector<double> entries)
        : n_(n), entries_(std::move(entries)) {}

    int n_ = 0;
    std::vector<double> entries_;
};

/// diam(A) = max_{i,j} (1/2) sum_l |a_il - a_jl|; zero for n = 1.
double diam(const StochasticMatrix& a);

/// Mixing coefficient Lambda(A) = min_{i,j} sum_l min(a_il, a_jl).
/// Satisfies mixing(A) = 1 - diam(A).
double mixing(const StochasticMatrix& a);

/// Matrix product A*B, revalidated as row-stochastic.
StochasticMatrix compose(const StochasticMatrix& a, const StochasticMatrix& b);

/// n agent rows, each a point in R^m. Entries must be finite.
class StateBlock {
public:
    StateBlock(int n, int m, std::vector<double> values);
    static StateBlock zeros(int n, int m);
    static StateBlock constant(int n, int m, double c);
    /// Deterministic spread x_i = i - (n+1)/2 in every coordinate (1-based i),
    /// the default initial condition for experiments.
    static StateBlock spread(int n, int m);

    int agents() const { return n_; }
    int dim() const { return m_; }
    double operator()(int i, int k) const { return values_[static_cast<size_t>(i) * m_ + k]; }
    double& at(int i, int k) { return values_[static_cast<size_t>(i) * m_ + k]; }
    std::span<const double> agent_row(int i) const {
        return {values_.data() + static_cast<size_t>(i) * m_, static_cast<size_t>(m_)};
    }
    const std::vector<double>& data() const { return values_; }

    bool operator==(const StateBlock& other) const = default;

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<double> values_;
};

/// d(x) = max pairwise linf distance between agent rows; zero for n = 1.
double state_diameter(const StateBlock& x);

/// Row i of the result is the A-weighted average of the rows of x.
StateBlock apply(const StochasticMatrix& a, const StateBlock& x);

StateBlock add(const StateBlock& x, const StateBlock& y);

/// Column-wise mean of the agent rows, i.e. xbar = (1/n) e^T x.
std::vector<double> column_mean(const StateBlock& x);

double linf_norm(std::span<const double> v);
double linf_dist(std::span<const double> a, std::span<const double> b);

// JSON (arrays of arrays, row-major) and CSV interchange.
std::string matrix_to_json(const StochasticMatrix& a);
StochasticMatrix matrix_from_json(const std::string& text);
std::string state_to_json(const StateBlock& x);
StateBlock state_from_json(const std::string& text);
/// CSV body with header `row,col,value`, 17 significant digits.
std::string matrix_to_csv(const StochasticMatrix& a);

/// printf("%.17g") into a std::string; shared by all CSV writers.
std::string format_real(double v);

} // namespace ranopt

#endif
