#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rationale {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. Column vectors are (n, 1) matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double& at(std::size_t k) { return data[k]; }
    double at(std::size_t k) const { return data[k]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }
    std::string shape_str() const;

    void fill(double v);
    void zero() { fill(0.0); }
    bool all_finite() const;

    static Matrix column(std::vector<double> values);
};

// Deterministic counter-based generator (splitmix64). Identical seeds give
// identical draw sequences on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double next_double();                       // uniform [0, 1)
    double uniform(double lo, double hi);
    bool bernoulli(double p) { return next_double() < p; }
    std::uint64_t below(std::uint64_t n);       // uniform {0, ..., n-1}

    // Independent stream derived from (seed, salt); used for per-epoch streams.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

private:
    std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// a.cols must equal b.rows; accumulation runs in row-major (k-ascending) order
// so results are bitwise reproducible.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix sigmoid(const Matrix& x);
Matrix tanh_op(const Matrix& x);
double sigmoid_scalar(double x);

// In-place accumulation kernels used by the backward passes.
void gemv_acc(const Matrix& w, const Matrix& x, Matrix& out);    // out += W x
void gemv_t_acc(const Matrix& w, const Matrix& v, Matrix& out);  // out += W^T v
void outer_acc(Matrix& g, const Matrix& a, const Matrix& b);     // G += a b^T
void axpy(Matrix& y, double s, const Matrix& x);                 // y += s x
void scale(Matrix& x, double s);

// Central differences (f(x+eps e_i) - f(x-eps e_i)) / 2 eps per coordinate.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double eps = 1e-5);

// relative error = |a - n| / max(|a|, |n|, 1e-8)
double rel_error(double analytic, double numeric);
double max_rel_error(const Matrix& analytic, const Matrix& numeric);

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    double tolerance = 1e-4;
    std::vector<GradCheckEntry> entries;

    void add(const std::string& name, double err) {
        entries.push_back({name, err, err <= tolerance});
    }
    bool all_pass() const;
};

// Solves A x = b (n x n) by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

}  // namespace rationale
