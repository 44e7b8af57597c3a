#pragma once

#include <cstddef>
#include <vector>

#include "orbitrace/core.hpp"

namespace orbitrace {

/// Dense row-major complex matrix.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static CMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    CMatrix adjoint() const;
    CMatrix transpose() const;
    double frobenius_norm() const;
    double norm1() const;

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(Complex s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(Complex s, CMatrix a);

/// Upper Hessenberg form by Householder reflections (a unitary similarity).
CMatrix hessenberg(const CMatrix& a);

/// All eigenvalues: balancing, Hessenberg reduction, single-shift complex QR with
/// Wilkinson shifts. Sorted by (Re, Im). Throws NoConvergenceQR.
std::vector<Complex> eigenvalues(const CMatrix& a);

/// Upper bound on the smallest singular value of (H - lambda I) for an upper
/// Hessenberg H, from a few steps of inverse iteration.
double singular_witness(const CMatrix& hess, Complex lambda);

CMatrix expm(const CMatrix& a);
CMatrix inverse(const CMatrix& a);

}  // namespace orbitrace
