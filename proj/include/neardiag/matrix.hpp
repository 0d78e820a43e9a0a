#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace neardiag {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;
using RealVector = std::vector<double>;

/// Dense row-major complex matrix. Value semantics, immutable in spirit:
/// operations return new matrices. Entries must stay finite; factory
/// constructors validate, arithmetic trusts its inputs.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);  // zero-filled
    ComplexMatrix(std::size_t rows, std::size_t cols, ComplexVector entries);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const ComplexVector& data() const noexcept { return data_; }

    ComplexMatrix adjoint() const;  // conjugate transpose
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    ComplexVector data_;
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, const ComplexMatrix& a);
ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x);

double frobenius_norm(const ComplexMatrix& a);

/// sqrt of the sum of squared moduli of entrywise differences.
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

double vector_norm(const ComplexVector& x);
double vector_norm(const RealVector& x);

/// Dense row-major real matrix, used for agent dynamics (A, F) and Laplacians
/// on the simulation path.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols);
    RealMatrix(std::size_t rows, std::size_t cols, RealVector entries);

    static RealMatrix identity(std::size_t n);
    static RealMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const RealVector& data() const noexcept { return data_; }
    bool all_finite() const;

    ComplexMatrix to_complex() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    RealVector data_;
};

}  // namespace neardiag
