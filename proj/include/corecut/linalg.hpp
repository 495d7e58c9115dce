#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace corecut {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Minkowski product of signature (-,+,...,+); coordinate 0 is the timelike one.
inline double mink_dot(const Vec& a, const Vec& b) {
    double s = -a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
    return r;
}

inline void axpy(Vec& y, double c, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline Vec added(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec subtracted(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

// One nonzero vector from the null space of the dense rows-major matrix A
// (rows x cols, rows < cols required so the null space is nontrivial).
// Gaussian elimination with partial pivoting; free variable set to 1.
std::vector<double> null_space_vector(std::vector<double> a, int rows, int cols);

// Solve the square system A x = b in place (Gaussian elimination, partial
// pivoting). Returns false if the matrix is numerically singular.
bool solve_linear(std::vector<double> a, int n, std::vector<double> b, std::vector<double>& x);

}  // namespace corecut
