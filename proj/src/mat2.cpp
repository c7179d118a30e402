#include "hawkesvol/mat2.hpp"

#include "hawkesvol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace hawkesvol {

bool Vec2::finite() const { return std::isfinite(v[0]) && std::isfinite(v[1]); }

double Mat2::max_abs() const {
    double out = 0.0;
    for (double x : a) out = std::max(out, std::abs(x));
    return out;
}

bool Mat2::finite() const {
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

Vec2 operator+(const Vec2& x, const Vec2& y) { return {{x[0] + y[0], x[1] + y[1]}}; }
Vec2 operator-(const Vec2& x, const Vec2& y) { return {{x[0] - y[0], x[1] - y[1]}}; }
Vec2 operator*(double s, const Vec2& x) { return {{s * x[0], s * x[1]}}; }
Vec2 hadamard(const Vec2& x, const Vec2& y) { return {{x[0] * y[0], x[1] * y[1]}}; }

namespace {

template <typename Op>
Mat2 elementwise(const Mat2& x, const Mat2& y, Op op) {
    Mat2 out;
    for (std::size_t i = 0; i < 4; ++i) out.a[i] = op(x.a[i], y.a[i]);
    return out;
}

}  // namespace

Mat2 operator+(const Mat2& x, const Mat2& y) { return elementwise(x, y, std::plus<>{}); }
Mat2 operator-(const Mat2& x, const Mat2& y) { return elementwise(x, y, std::minus<>{}); }
Mat2 operator-(const Mat2& x) { return -1.0 * x; }
Mat2 hadamard(const Mat2& x, const Mat2& y) { return elementwise(x, y, std::multiplies<>{}); }
Mat2 hadamard_div(const Mat2& x, const Mat2& y) { return elementwise(x, y, std::divides<>{}); }

Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
             x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
}

Mat2 operator*(double s, const Mat2& x) { return {{s * x.a[0], s * x.a[1], s * x.a[2], s * x.a[3]}}; }
Mat2 operator+(const Mat2& x, double s) { return {{x.a[0] + s, x.a[1] + s, x.a[2] + s, x.a[3] + s}}; }
Mat2 operator-(const Mat2& x, double s) { return x + (-s); }

Vec2 operator*(const Mat2& m, const Vec2& x) {
    return {{m.a[0] * x[0] + m.a[1] * x[1], m.a[2] * x[0] + m.a[3] * x[1]}};
}

Mat2 hadamard_sqrt(const Mat2& x) {
    return {{std::sqrt(x.a[0]), std::sqrt(x.a[1]), std::sqrt(x.a[2]), std::sqrt(x.a[3])}};
}

Mat2 outer(const Vec2& x, const Vec2& y) { return {{x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]}}; }

Mat2 sym_sum(const Mat2& m) { return m + m.transpose(); }

Mat2 diag_part(const Mat2& m) { return {{m.a[0], 0.0, 0.0, m.a[3]}}; }

double quad_form(const Vec2& x, const Mat2& m, const Vec2& y) {
    const Vec2 my = m * y;
    return x[0] * my[0] + x[1] * my[1];
}

Mat2 inverse(const Mat2& m) {
    const double d = m.det();
    const double scale = std::max(m.max_abs() * m.max_abs(), std::numeric_limits<double>::min());
    if (!std::isfinite(d) || std::abs(d) <= 1e-14 * scale) {
        throw NumericalError("singular 2x2 matrix");
    }
    return (1.0 / d) * Mat2{{m.a[3], -m.a[1], -m.a[2], m.a[0]}};
}

double spectral_radius(const Mat2& m) {
    const Eigen2 e = eig2(m);
    return std::max(std::abs(e.values[0]), std::abs(e.values[1]));
}

namespace {

CVec2 normalize(CVec2 v) {
    const double norm = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    const std::size_t big = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
    const double big_abs = std::abs(v[big]);
    const std::complex<double> phase = std::conj(v[big]) / big_abs;
    for (auto& x : v) x = x * phase / norm;
    v[big] = {big_abs / norm, 0.0};
    return v;
}

}  // namespace

Eigen2 eig2(const Mat2& m) {
    using C = std::complex<double>;
    const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    const double half_tr = 0.5 * (a + d);
    const double half_diff = 0.5 * (a - d);
    const double disc = half_diff * half_diff + b * c;

    Eigen2 out;
    const C s = disc >= 0.0 ? C(std::sqrt(disc), 0.0) : C(0.0, std::sqrt(-disc));
    out.real = disc >= 0.0;
    out.values = {C(half_tr) + s, C(half_tr) - s};

    const double scale = std::max({std::abs(out.values[0]), std::abs(out.values[1]), m.max_abs()});
    const bool repeated = std::abs(out.values[0] - out.values[1]) <= kRepeatedEigenTolerance * scale;
    if (repeated) {
        const bool scalar = std::abs(b) <= kRepeatedEigenTolerance * scale &&
                            std::abs(c) <= kRepeatedEigenTolerance * scale;
        if (!scalar) {
            out.defective = true;
            return out;
        }
        out.vectors = {CVec2{C(1.0), C(0.0)}, CVec2{C(0.0), C(1.0)}};
        return out;
    }

    for (std::size_t k = 0; k < 2; ++k) {
        const C xi = out.values[k];
        const CVec2 from_row0{C(b), xi - a};
        const CVec2 from_row1{xi - d, C(c)};
        const double n0 = std::norm(from_row0[0]) + std::norm(from_row0[1]);
        const double n1 = std::norm(from_row1[0]) + std::norm(from_row1[1]);
        out.vectors[k] = normalize(n0 >= n1 ? from_row0 : from_row1);
    }
    return out;
}

// ---------------------------------------------------------------------------

Mat4 Mat4::identity() {
    Mat4 out;
    for (std::size_t i = 0; i < 4; ++i) out(i, i) = 1.0;
    return out;
}

Mat4 operator+(const Mat4& x, const Mat4& y) {
    Mat4 out;
    for (std::size_t i = 0; i < 16; ++i) out.a[i] = x.a[i] + y.a[i];
    return out;
}

Mat4 operator*(double s, const Mat4& x) {
    Mat4 out;
    for (std::size_t i = 0; i < 16; ++i) out.a[i] = s * x.a[i];
    return out;
}

Vec4 operator*(const Mat4& m, const Vec4& x) {
    Vec4 out;
    for (std::size_t r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < 4; ++c) acc += m(r, c) * x[c];
        out[r] = acc;
    }
    return out;
}

Vec4 operator-(const Vec4& x) { return {{-x[0], -x[1], -x[2], -x[3]}}; }

Vec4 vec(const Mat2& m) { return {{m(0, 0), m(1, 0), m(0, 1), m(1, 1)}}; }

Mat2 unvec(const Vec4& v) { return {{v[0], v[2], v[1], v[3]}}; }

Mat4 kron(const Mat2& x, const Mat2& y) {
    Mat4 out;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = x(i, j) * y(k, l);
    return out;
}

Mat4 hadamard_vec_lhs(const Mat2& m, const Mat2& n) {
    Mat4 out;
    for (std::size_t block = 0; block < 2; ++block) {
        const Mat2 piece = m * Mat2::diag(n.column(block));
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) out(2 * block + r, 2 * block + c) = piece(r, c);
    }
    return out;
}

Mat4 hadamard_vec_rhs(const Mat2& m, const Mat2& n) {
    Mat4 out;
    out(0, 0) = m(0, 0) * n(0, 0);
    out(0, 1) = m(1, 0) * n(0, 1);
    out(1, 2) = m(0, 0) * n(1, 0);
    out(1, 3) = m(1, 0) * n(1, 1);
    out(2, 0) = m(0, 1) * n(0, 0);
    out(2, 1) = m(1, 1) * n(0, 1);
    out(3, 2) = m(0, 1) * n(1, 0);
    out(3, 3) = m(1, 1) * n(1, 1);
    return out;
}

namespace {

double norm1(const Mat4& m) {
    double best = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        double col = 0.0;
        for (std::size_t r = 0; r < 4; ++r) col += std::abs(m(r, c));
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

Solve4Result kron_solve4(const Mat4& lhs, const Vec4& rhs) {
    // Gauss-Jordan on [lhs | I | rhs] yields both the solution and the inverse used for the
    // condition estimate.
    std::array<std::array<double, 9>, 4> aug{};
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) aug[r][c] = lhs(r, c);
        aug[r][4 + r] = 1.0;
        aug[r][8] = rhs[r];
    }
    const double lhs_norm = norm1(lhs);
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 4; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (!(std::abs(aug[pivot][col]) > 0.0) || !std::isfinite(aug[pivot][col])) {
            throw IllConditionedError(std::numeric_limits<double>::infinity());
        }
        std::swap(aug[pivot], aug[col]);
        const double inv = 1.0 / aug[col][col];
        for (double& x : aug[col]) x *= inv;
        for (std::size_t r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = aug[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < 9; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    Mat4 inv;
    Solve4Result out;
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) inv(r, c) = aug[r][4 + c];
        out.x[r] = aug[r][8];
    }
    out.condition = lhs_norm * norm1(inv);
    if (!std::isfinite(out.condition) || out.condition > kMaxCondition) {
        throw IllConditionedError(out.condition);
    }
    return out;
}

Mat2 kron_solve4_mat(const Mat4& lhs, const Mat2& rhs) { return unvec(kron_solve4(lhs, vec(rhs)).x); }

}  // namespace hawkesvol
