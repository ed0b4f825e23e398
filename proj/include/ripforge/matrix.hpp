#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ripforge {

/// Dense n-by-p design matrix, row-major.
///
/// n is the number of observations, p the number of features. This is the
/// object the certifiers operate on; columns are the candidate regressors.
class DesignMatrix {
public:
    DesignMatrix(std::size_t n, std::size_t p)
        : n_(n), p_(p), data_(n * p, 0.0) {
        if (n == 0 || p == 0) throw std::invalid_argument("DesignMatrix: n and p must be >= 1");
    }

    DesignMatrix(std::size_t n, std::size_t p, std::vector<double> entries)
        : n_(n), p_(p), data_(std::move(entries)) {
        if (n == 0 || p == 0) throw std::invalid_argument("DesignMatrix: n and p must be >= 1");
        if (data_.size() != n * p) throw std::invalid_argument("DesignMatrix: entry count != n*p");
        for (double v : data_)
            if (!std::isfinite(v)) throw std::invalid_argument("DesignMatrix: non-finite entry");
    }

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return p_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * p_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * p_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    void validate() const {
        for (double v : data_)
            if (!std::isfinite(v)) throw std::invalid_argument("DesignMatrix: non-finite entry");
    }

private:
    std::size_t n_, p_;
    std::vector<double> data_;
};

/// Dense symmetric matrix. Symmetry is enforced on construction: only one
/// triangle is taken as the source of truth and mirrored, so
/// entries[i][j] == entries[j][i] holds exactly.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(std::size_t dim)
        : dim_(dim), data_(dim * dim, 0.0) {
        if (dim == 0) throw std::invalid_argument("SymmetricMatrix: dim must be >= 1");
    }

    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    /// Sets entry (i, j) and its mirror.
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * dim_ + j] = v;
        data_[j * dim_ + i] = v;
    }

    const std::vector<double>& data() const { return data_; }

    /// Copies the rows/columns indexed by `subset` into a dense buffer
    /// (subset.size() x subset.size(), row-major).
    void extract(std::vector<std::size_t> const& subset, std::vector<double>& out) const {
        const std::size_t k = subset.size();
        out.resize(k * k);
        for (std::size_t a = 0; a < k; ++a) {
            const double* row = data_.data() + subset[a] * dim_;
            for (std::size_t b = 0; b < k; ++b) out[a * k + b] = row[subset[b]];
        }
    }

private:
    std::size_t dim_;
    std::vector<double> data_;
};

/// Gram deviation X^T X - I, exactly symmetric, dim = p.
inline SymmetricMatrix gram_deviation(const DesignMatrix& X) {
    const std::size_t n = X.rows(), p = X.cols();
    std::vector<double> upper(p * p, 0.0);
    const double* d = X.data().data();
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = d + r * p;
        for (std::size_t i = 0; i < p; ++i) {
            const double xi = row[i];
            double* out = upper.data() + i * p;
            for (std::size_t j = i; j < p; ++j) out[j] += xi * row[j];
        }
    }
    SymmetricMatrix G(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            const double v = upper[i * p + j] - (i == j ? 1.0 : 0.0);
            G.set(i, j, v);
        }
    }
    return G;
}

/// Entrywise max absolute value of X^T X - I (diagonal deviations included).
inline double max_incoherence(const DesignMatrix& X) {
    const SymmetricMatrix G = gram_deviation(X);
    double m = 0.0;
    const std::size_t p = G.dim();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) m = std::max(m, std::fabs(G(i, j)));
    return m;
}

}  // namespace ripforge
