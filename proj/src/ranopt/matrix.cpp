#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace ranopt {

namespace {

void check_entries(int n, const std::vector<double>& entries) {
    if (n <= 0 || entries.size() != static_cast<size_t>(n) * n)
        fail(ErrorCode::NonSquare, "matrix entries do not form an n-by-n array");
    for (double v : entries) {
        if (!std::isfinite(v) || v < 0.0)
            fail(ErrorCode::NegativeEntry, "matrix entry not finite and nonnegative");
    }
}

} // namespace

StochasticMatrix StochasticMatrix::make(int n, std::vector<double> entries) {
    check_entries(n, entries);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += entries[static_cast<size_t>(i) * n + j];
        if (std::abs(sum - 1.0) > kDriftTol)
            fail(ErrorCode::RowSumOutOfTolerance,
                 "row " + std::to_string(i) + " sums to " + std::to_string(sum));
        for (int j = 0; j < n; ++j) entries[static_cast<size_t>(i) * n + j] /= sum;
    }
    return StochasticMatrix(n, std::move(entries));
}

StochasticMatrix StochasticMatrix::make(const std::vector<std::vector<double>>& rows) {
    int n = static_cast<int>(rows.size());
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(n) * n);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n)
            fail(ErrorCode::NonSquare, "ragged or non-square row array");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return make(n, std::move(flat));
}

StochasticMatrix StochasticMatrix::identity(int n) {
    std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) e[static_cast<size_t>(i) * n + i] = 1.0;
    return make(n, std::move(e));
}

StochasticMatrix StochasticMatrix::uniform_mixing(int n) {
    std::vector<double> e(static_cast<size_t>(n) * n, 1.0 / n);
    return make(n, std::move(e));
}

bool StochasticMatrix::is_doubly_stochastic(double tol) const {
    return max_column_sum_deviation() <= tol;
}

double StochasticMatrix::max_column_sum_deviation() const {
    double worst = 0.0;
    for (int j = 0; j < n_; ++j) {
        double sum = 0.0;
        for (int i = 0; i < n_; ++i) sum += (*this)(i, j);
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

double diam(const StochasticMatrix& a) {
    int n = a.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (int l = 0; l < n; ++l) sum += std::abs(a(i, l) - a(j, l));
            worst = std::max(worst, 0.5 * sum);
        }
    }
    return worst;
}

double mixing(const StochasticMatrix& a) {
    int n = a.dim();
    if (n == 1) return 1.0;
    double best = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (int l = 0; l < n; ++l) sum += std::min(a(i, l), a(j, l));
            best = std::min(best, sum);
        }
    }
    return best;
}

StochasticMatrix compose(const StochasticMatrix& a, const StochasticMatrix& b) {
    if (a.dim() != b.dim())
        fail(ErrorCode::DimensionMismatch, "matrix product dimension mismatch");
    int n = a.dim();
    std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
            double ail = a(i, l);
            if (ail == 0.0) continue;
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i) * n + j] += ail * b(l, j);
        }
    }
    return StochasticMatrix::make(n, std::move(out));
}

StateBlock::StateBlock(int n, int m, std::vector<double> values)
    : n_(n), m_(m), values_(std::move(values)) {
    if (n <= 0 || m <= 0 || values_.size() != static_cast<size_t>(n) * m)
        fail(ErrorCode::DimensionMismatch, "state block values do not form an n-by-m array");
    for (double v : values_) {
        if (!std::isfinite(v))
            fail(ErrorCode::InvalidArgument, "state block entry not finite");
    }
}

StateBlock StateBlock::zeros(int n, int m) {
    return StateBlock(n, m, std::vector<double>(static_cast<size_t>(n) * m, 0.0));
}

StateBlock StateBlock::constant(int n, int m, double c) {
    return StateBlock(n, m, std::vector<double>(static_cast<size_t>(n) * m, c));
}

StateBlock StateBlock::spread(int n, int m) {
    StateBlock x = zeros(n, m);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m; ++k) x.at(i, k) = (i + 1) - 0.5 * (n + 1);
    return x;
}

double linf_norm(std::span<const double> v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x));
    return worst;
}

double linf_dist(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

double state_diameter(const StateBlock& x) {
    int n = x.agents();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            worst = std::max(worst, linf_dist(x.agent_row(i), x.agent_row(j)));
    return worst;
}

StateBlock apply(const StochasticMatrix& a, const StateBlock& x) {
    if (a.dim() != x.agents())
        fail(ErrorCode::DimensionMismatch, "matrix/state dimension mismatch");
    int n = x.agents(), m = x.dim();
    std::vector<double> out(static_cast<size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double w = a(i, j);
            if (w == 0.0) continue;
            for (int k = 0; k < m; ++k)
                out[static_cast<size_t>(i) * m + k] += w * x(j, k);
        }
    }
    return StateBlock(n, m, std::move(out));
}

StateBlock add(const StateBlock& x, const StateBlock& y) {
    if (x.agents() != y.agents() || x.dim() != y.dim())
        fail(ErrorCode::DimensionMismatch, "state block sum dimension mismatch");
    std::vector<double> out(x.data());
    for (size_t k = 0; k < out.size(); ++k) out[k] += y.data()[k];
    return StateBlock(x.agents(), x.dim(), std::move(out));
}

std::vector<double> column_mean(const StateBlock& x) {
    std::vector<double> mean(x.dim(), 0.0);
    for (int i = 0; i < x.agents(); ++i)
        for (int k = 0; k < x.dim(); ++k) mean[k] += x(i, k);
    for (double& v : mean) v /= x.agents();
    return mean;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::vector<double>> rows_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("bad JSON: ") + e.what());
    }
    if (!j.is_array()) fail(ErrorCode::ConfigError, "expected an array of arrays");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) fail(ErrorCode::ConfigError, "expected an array of arrays");
        rows.emplace_back();
        for (const auto& v : row) {
            if (!v.is_number()) fail(ErrorCode::ConfigError, "expected numeric entries");
            rows.back().push_back(v.get<double>());
        }
    }
    return rows;
}

} // namespace

std::string matrix_to_json(const StochasticMatrix& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < a.dim(); ++i)
        rows.push_back(std::vector<double>(a.row(i).begin(), a.row(i).end()));
    return rows.dump();
}

StochasticMatrix matrix_from_json(const std::string& text) {
    return StochasticMatrix::make(rows_from_json(text));
}

std::string state_to_json(const StateBlock& x) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < x.agents(); ++i)
        rows.push_back(std::vector<double>(x.agent_row(i).begin(), x.agent_row(i).end()));
    return rows.dump();
}

StateBlock state_from_json(const std::string& text) {
    auto rows = rows_from_json(text);
    if (rows.empty()) fail(ErrorCode::ConfigError, "empty state block");
    int n = static_cast<int>(rows.size());
    int m = static_cast<int>(rows[0].size());
    std::vector<double> flat;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m)
            fail(ErrorCode::DimensionMismatch, "ragged state block rows");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return StateBlock(n, m, std::move(flat));
}

std::string matrix_to_csv(const StochasticMatrix& a) {
    std::string out = "row,col,value\n";
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            out += std::to_string(i) + "," + std::to_string(j) + "," +
                   format_real(a(i, j)) + "\n";
    return out;
}

} // namespace ranopt
