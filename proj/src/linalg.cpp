#include "corecut/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "corecut/errors.hpp"

namespace corecut {

std::vector<double> null_space_vector(std::vector<double> a, int rows, int cols) {
    if (rows >= cols) throw InvalidInputError("null_space_vector: needs rows < cols");
    std::vector<int> pivot_col(rows, -1);
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int best = r;
        for (int i = r + 1; i < rows; ++i)
            if (std::abs(a[i * cols + c]) > std::abs(a[best * cols + c])) best = i;
        if (std::abs(a[best * cols + c]) < 1e-13) continue;
        for (int j = 0; j < cols; ++j) std::swap(a[r * cols + j], a[best * cols + j]);
        const double piv = a[r * cols + c];
        for (int j = 0; j < cols; ++j) a[r * cols + j] /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double f = a[i * cols + c];
            if (f != 0.0)
                for (int j = 0; j < cols; ++j) a[i * cols + j] -= f * a[r * cols + j];
        }
        pivot_col[r] = c;
        ++r;
    }
    // First non-pivot column becomes the free variable.
    std::vector<bool> is_pivot(cols, false);
    for (int i = 0; i < r; ++i) is_pivot[pivot_col[i]] = true;
    int free_col = -1;
    for (int c = 0; c < cols; ++c)
        if (!is_pivot[c]) {
            free_col = c;
            break;
        }
    std::vector<double> x(cols, 0.0);
    x[free_col] = 1.0;
    for (int i = 0; i < r; ++i) x[pivot_col[i]] = -a[i * cols + free_col];
    return x;
}

bool solve_linear(std::vector<double> a, int n, std::vector<double> b, std::vector<double>& x) {
    for (int c = 0; c < n; ++c) {
        int best = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(a[i * n + c]) > std::abs(a[best * n + c])) best = i;
        if (std::abs(a[best * n + c]) < 1e-13) return false;
        if (best != c) {
            for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[best * n + j]);
            std::swap(b[c], b[best]);
        }
        for (int i = c + 1; i < n; ++i) {
            const double f = a[i * n + c] / a[c * n + c];
            if (f != 0.0) {
                for (int j = c; j < n; ++j) a[i * n + j] -= f * a[c * n + j];
                b[i] -= f * b[c];
            }
        }
    }
    x.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return true;
}

}  // namespace corecut
