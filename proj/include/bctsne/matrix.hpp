#ifndef BCTSNE_MATRIX_HPP
#define BCTSNE_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "Eigen/Dense"

/**
 * @file matrix.hpp
 *
 * @brief Dense row-major matrix and the error types shared by all modules.
 */

namespace bctsne {

/**
 * @brief Raised when an input violates a documented precondition.
 */
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * @brief Raised when a size parameter (rank, neighbor count, ...) is out of range.
 */
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/**
 * @brief Raised by the optimizer when the embedding leaves the finite reals.
 */
class OptimizerError : public std::runtime_error {
public:
    OptimizerError(const std::string& msg, std::size_t iteration) :
        std::runtime_error(msg + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajor>;

/**
 * @brief Dense matrix of doubles stored in row-major order.
 *
 * Rows are observations (cells) and columns are features throughout the library.
 * Construction from external data checks that every entry is finite;
 * `validate_finite()` can be called again after in-place modification.
 */
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) :
        rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) :
        rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_) {
            throw ValidationError("matrix data length " + std::to_string(data_.size()) +
                                  " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
        }
        validate_finite();
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw ValidationError("ragged initializer list");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
        validate_finite();
    }

    static Matrix identity(std::size_t n) {
        Matrix out(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            out(i, i) = 1;
        }
        return out;
    }

    template<class Derived>
    static Matrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
        Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
        out.eigen() = m;
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& storage() const { return data_; }

    MatrixMap eigen() {
        return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
    }
    ConstMatrixMap eigen() const {
        return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
    }

    void validate_finite() const {
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i])) {
                throw ValidationError("non-finite entry at (" + std::to_string(i / cols_) + ", " +
                                      std::to_string(i % cols_) + ")");
            }
        }
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Largest absolute entry; zero for an empty matrix.
inline double max_abs(const Matrix& m) {
    double out = 0;
    for (double v : m.values()) {
        out = std::max(out, std::abs(v));
    }
    return out;
}

inline double frobenius_norm(const Matrix& m) {
    return m.eigen().norm();
}

}

#endif
