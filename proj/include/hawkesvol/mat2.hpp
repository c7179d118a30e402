#pragma once

// Exact-dimension linear algebra for the bivariate moment formulas: 2x2 matrices,
// 2-vectors, and the 4x4 systems obtained by column-major vectorization.

#include <array>
#include <complex>
#include <cstddef>

namespace hawkesvol {

struct Vec2 {
    std::array<double, 2> v{};

    constexpr double& operator[](std::size_t i) { return v[i]; }
    constexpr double operator[](std::size_t i) const { return v[i]; }

    static constexpr Vec2 constant(double x) { return {{x, x}}; }
    [[nodiscard]] double sum() const { return v[0] + v[1]; }
    [[nodiscard]] bool finite() const;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Row-major 2x2 matrix.
struct Mat2 {
    std::array<double, 4> a{};

    constexpr double& operator()(std::size_t r, std::size_t c) { return a[2 * r + c]; }
    constexpr double operator()(std::size_t r, std::size_t c) const { return a[2 * r + c]; }

    static constexpr Mat2 identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
    static constexpr Mat2 constant(double x) { return {{x, x, x, x}}; }
    static constexpr Mat2 diag(const Vec2& d) { return {{d[0], 0.0, 0.0, d[1]}}; }
    /// Matrix whose columns repeat the entries of `d` (column j is d[j] * 1).
    static constexpr Mat2 columns(const Vec2& d) { return {{d[0], d[1], d[0], d[1]}}; }

    [[nodiscard]] Mat2 transpose() const { return {{a[0], a[2], a[1], a[3]}}; }
    [[nodiscard]] double det() const { return a[0] * a[3] - a[1] * a[2]; }
    [[nodiscard]] double trace() const { return a[0] + a[3]; }
    [[nodiscard]] Vec2 diagonal() const { return {{a[0], a[3]}}; }
    [[nodiscard]] Vec2 column(std::size_t c) const { return {{a[c], a[2 + c]}}; }
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool finite() const;

    friend bool operator==(const Mat2&, const Mat2&) = default;
};

Vec2 operator+(const Vec2& x, const Vec2& y);
Vec2 operator-(const Vec2& x, const Vec2& y);
Vec2 operator*(double s, const Vec2& x);
Vec2 hadamard(const Vec2& x, const Vec2& y);

Mat2 operator+(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x);
Mat2 operator*(const Mat2& x, const Mat2& y);
Mat2 operator*(double s, const Mat2& x);
Mat2 operator+(const Mat2& x, double s);
Mat2 operator-(const Mat2& x, double s);
Vec2 operator*(const Mat2& m, const Vec2& x);

Mat2 hadamard(const Mat2& x, const Mat2& y);
Mat2 hadamard_div(const Mat2& x, const Mat2& y);
Mat2 hadamard_sqrt(const Mat2& x);
Mat2 outer(const Vec2& x, const Vec2& y);
/// M + M^T.
Mat2 sym_sum(const Mat2& m);
/// Diagonal part of a square matrix (off-diagonals zeroed).
Mat2 diag_part(const Mat2& m);
/// x^T M y.
double quad_form(const Vec2& x, const Mat2& m, const Vec2& y);
/// Adjugate inverse; throws NumericalError when the determinant vanishes.
Mat2 inverse(const Mat2& m);
double spectral_radius(const Mat2& m);

/// The direction vector u = (1, -1) used for the net up-minus-down count.
inline constexpr Vec2 kNetDirection{{1.0, -1.0}};

// ---------------------------------------------------------------------------
// Eigen-decomposition

using CVec2 = std::array<std::complex<double>, 2>;

struct Eigen2 {
    /// Eigenvalues ordered (tr/2 + s, tr/2 - s) with s the principal root of the discriminant.
    CVec2 values{};
    /// vectors[k] is the unit eigenvector for values[k]; largest component real and positive.
    std::array<CVec2, 2> vectors{};
    bool real{true};
    /// Repeated eigenvalue with a one-dimensional eigenspace; `vectors` is then meaningless.
    bool defective{false};
};

/// Eigenvalues within this relative distance are treated as repeated.
inline constexpr double kRepeatedEigenTolerance = 1e-9;

Eigen2 eig2(const Mat2& m);

// ---------------------------------------------------------------------------
// 4x4 vectorized systems. vec() stacks columns: vec(X) = (X11, X21, X12, X22).

struct Vec4 {
    std::array<double, 4> v{};
    constexpr double& operator[](std::size_t i) { return v[i]; }
    constexpr double operator[](std::size_t i) const { return v[i]; }
};

/// Row-major 4x4 matrix.
struct Mat4 {
    std::array<double, 16> a{};
    constexpr double& operator()(std::size_t r, std::size_t c) { return a[4 * r + c]; }
    constexpr double operator()(std::size_t r, std::size_t c) const { return a[4 * r + c]; }

    static Mat4 identity();
};

Mat4 operator+(const Mat4& x, const Mat4& y);
Mat4 operator*(double s, const Mat4& x);
Vec4 operator*(const Mat4& m, const Vec4& x);
Vec4 operator-(const Vec4& x);

Vec4 vec(const Mat2& m);
Mat2 unvec(const Vec4& v);
Mat4 kron(const Mat2& x, const Mat2& y);

/// Block-diagonal operator with vec(M (N o X)) = hadamard_vec_lhs(M, N) vec(X) for every X.
Mat4 hadamard_vec_lhs(const Mat2& m, const Mat2& n);
/// Operator with vec((N o X) M) = hadamard_vec_rhs(M, N) vec(X). Valid only for symmetric X:
/// the layout folds X21 and X12 into one another.
Mat4 hadamard_vec_rhs(const Mat2& m, const Mat2& n);

/// Systems with a 1-norm condition estimate above this are rejected.
inline constexpr double kMaxCondition = 1e12;

struct Solve4Result {
    Vec4 x;
    double condition{0.0};
};

/// Solve lhs * x = rhs by partial-pivot elimination. Throws IllConditionedError when lhs is
/// singular or its condition estimate exceeds kMaxCondition.
Solve4Result kron_solve4(const Mat4& lhs, const Vec4& rhs);

/// Convenience: solve and reshape into a 2x2 matrix.
Mat2 kron_solve4_mat(const Mat4& lhs, const Mat2& rhs);

}  // namespace hawkesvol
