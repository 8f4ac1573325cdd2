#include "rationale/numeric.hpp"

#include <cmath>
#include <sstream>

namespace rationale {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
        throw ShapeError("matrix init: " + std::to_string(data.size()) + " values for shape " +
                         shape_str());
    }
}

std::string Matrix::shape_str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

void Matrix::fill(double v) {
    for (double& x : data) x = v;
}

bool Matrix::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix Matrix::column(std::vector<double> values) {
    std::size_t n = values.size();
    return Matrix(n, 1, std::move(values));
}

std::uint64_t Rng::next_u64() {
    // splitmix64: state is a counter stepped by the golden-ratio increment.
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

std::uint64_t Rng::below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    return r.next_u64();
}

static void require_mul_shapes(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_mul_shapes(a, b);
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* orow = &out.data[i * b.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = arow[k];
            const double* brow = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

double sigmoid_scalar(double x) {
    // sign-split form; never overflows
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
    Matrix out(x.rows, x.cols);
    for (std::size_t k = 0; k < x.size(); ++k) out.data[k] = sigmoid_scalar(x.data[k]);
    return out;
}

Matrix tanh_op(const Matrix& x) {
    Matrix out(x.rows, x.cols);
    for (std::size_t k = 0; k < x.size(); ++k) out.data[k] = std::tanh(x.data[k]);
    return out;
}

void gemv_acc(const Matrix& w, const Matrix& x, Matrix& out) {
    if (w.cols != x.rows || x.cols != 1 || out.rows != w.rows || out.cols != 1) {
        throw ShapeError("gemv: " + w.shape_str() + " x " + x.shape_str() + " -> " +
                         out.shape_str());
    }
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wrow = &w.data[i * w.cols];
        double acc = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) acc += wrow[k] * x.data[k];
        out.data[i] += acc;
    }
}

void gemv_t_acc(const Matrix& w, const Matrix& v, Matrix& out) {
    if (w.rows != v.rows || v.cols != 1 || out.rows != w.cols || out.cols != 1) {
        throw ShapeError("gemv_t: " + w.shape_str() + "^T x " + v.shape_str() + " -> " +
                         out.shape_str());
    }
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wrow = &w.data[i * w.cols];
        double vi = v.data[i];
        for (std::size_t k = 0; k < w.cols; ++k) out.data[k] += wrow[k] * vi;
    }
}

void outer_acc(Matrix& g, const Matrix& a, const Matrix& b) {
    if (g.rows != a.rows || g.cols != b.rows || a.cols != 1 || b.cols != 1) {
        throw ShapeError("outer: " + a.shape_str() + " x " + b.shape_str() + "^T -> " +
                         g.shape_str());
    }
    for (std::size_t i = 0; i < a.rows; ++i) {
        double ai = a.data[i];
        double* grow = &g.data[i * g.cols];
        for (std::size_t j = 0; j < b.rows; ++j) grow[j] += ai * b.data[j];
    }
}

void axpy(Matrix& y, double s, const Matrix& x) {
    if (!y.same_shape(x)) {
        throw ShapeError("axpy: " + y.shape_str() + " += s*" + x.shape_str());
    }
    for (std::size_t k = 0; k < y.size(); ++k) y.data[k] += s * x.data[k];
}

void scale(Matrix& x, double s) {
    for (double& v : x.data) v *= s;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double eps) {
    if (!(eps > 0.0)) throw NumericError("finite_diff_grad: eps must be > 0");
    Matrix probe = x;
    Matrix grad(x.rows, x.cols);
    for (std::size_t k = 0; k < x.size(); ++k) {
        double orig = probe.data[k];
        probe.data[k] = orig + eps;
        double fp = f(probe);
        probe.data[k] = orig - eps;
        double fm = f(probe);
        probe.data[k] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                               std::to_string(k));
        }
        grad.data[k] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

double rel_error(double analytic, double numeric) {
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

double max_rel_error(const Matrix& analytic, const Matrix& numeric) {
    if (!analytic.same_shape(numeric)) {
        throw ShapeError("max_rel_error: " + analytic.shape_str() + " vs " + numeric.shape_str());
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        worst = std::max(worst, rel_error(analytic.data[k], numeric.data[k]));
    }
    return worst;
}

bool GradCheckReport::all_pass() const {
    for (const auto& e : entries) {
        if (!e.pass) return false;
    }
    return true;
}

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) {
        throw ShapeError("solve_linear: " + a.shape_str() + ", rhs " + std::to_string(b.size()));
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        }
        if (std::fabs(a(pivot, col)) < 1e-300) {
            throw NumericError("solve_linear: singular matrix");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double m = a(r, col) / a(col, col);
            if (m == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= m * a(col, j);
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    return x;
}

}  // namespace rationale
