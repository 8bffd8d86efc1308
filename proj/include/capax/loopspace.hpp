#pragma once
// Truncated Fourier model of H^{1/2}(S^1, R^{2n}).
//
// R^{2n} = C^n with z_j = x_j + i y_j.  Points of R^{2n} are stored
// interleaved (x_1, y_1, ..., x_n, y_n).  A loop is
//     x(t) = sum_{|k| <= K} e^{2 pi i k t} x_k,   x_k in C^n,
// with complex scalar multiplication, so J = multiplication by i.

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace capax {

using cplx = std::complex<double>;

class FourierLoop {
public:
    FourierLoop() = default;
    FourierLoop(int n, int K);

    static FourierLoop constant(const Eigen::VectorXd& p, int K = 0);
    // e^{2 pi i k t} v
    static FourierLoop mode_loop(int k, const Eigen::VectorXcd& v, int K);

    int n() const { return n_; }
    int K() const { return K_; }
    // real degrees of freedom 2n(2K+1)
    int dof() const { return 2 * n_ * (2 * K_ + 1); }

    cplx get(int k, int j) const;
    cplx& at(int k, int j);
    Eigen::VectorXcd mode(int k) const;
    void set_mode(int k, const Eigen::VectorXcd& v);
    // n x (2K+1), column k+K
    const Eigen::MatrixXcd& coeffs() const { return c_; }
    Eigen::MatrixXcd& coeffs() { return c_; }

    FourierLoop resized(int K) const;
    FourierLoop derivative() const;
    bool is_zero() const { return c_.isZero(0.0); }

    // Real coordinates, index ((k+K) n + j) 2 + (0: Re, 1: Im).
    Eigen::VectorXd to_real() const;
    static FourierLoop from_real(int n, int K, const Eigen::VectorXd& v);
    // Coordinates in the H^{1/2}-orthonormal basis; same index layout.
    Eigen::VectorXd to_h12() const;
    static FourierLoop from_h12(int n, int K, const Eigen::VectorXd& v);

    FourierLoop& operator+=(const FourierLoop& o);
    FourierLoop& operator-=(const FourierLoop& o);
    FourierLoop& operator*=(double s);

private:
    int n_ = 0;
    int K_ = 0;
    Eigen::MatrixXcd c_;
};

FourierLoop operator+(FourierLoop a, const FourierLoop& b);
FourierLoop operator-(FourierLoop a, const FourierLoop& b);
FourierLoop operator*(double s, FourierLoop a);

// An L^2 loop given by its Fourier modes; only the pairing differs.
using L2Loop = FourierLoop;

struct SplitVector {
    FourierLoop plus;       // k >= 1
    Eigen::VectorXd zero;   // k = 0, in R^{2n}
    FourierLoop minus;      // k <= -1
    FourierLoop recombine() const;
};

// E^0 = E^0_+ (+) E^0_-.  Columns of each basis span an n-dim subspace.
struct ZeroModeSplit {
    Eigen::MatrixXd plusBasis;   // 2n x n
    Eigen::MatrixXd minusBasis;  // 2n x n

    // E^0_- = span<x_1..x_n>, E^0_+ = span<y_1..y_n>
    static ZeroModeSplit standard(int n);
    int n() const { return static_cast<int>(plusBasis.cols()); }
    void validate() const;
    // The block of L on E^0: +1 on E^0_+, -1 on E^0_-.  Built as I - 2 P
    // with P the orthogonal projector onto E^0_-, so that L stays
    // self-adjoint when the given bases are not orthogonal.
    Eigen::MatrixXd L0() const;
};

double h12_inner(const FourierLoop& x, const FourierLoop& y);
double h12_norm(const FourierLoop& x);
double l2_inner(const L2Loop& y, const FourierLoop& x);
SplitVector split(const FourierLoop& x);
FourierLoop jstar(const L2Loop& y);

// x(j/m), j = 0..m-1, as columns of a 2n x m matrix.
Eigen::MatrixXd eval_grid(const FourierLoop& x, int m);
// Inverse of eval_grid: discrete Fourier coefficients up to order K.
FourierLoop project_grid(const Eigen::MatrixXd& values, int K);
// x(t) at one time, in R^{2n}
Eigen::VectorXd eval_at(const FourierLoop& x, double t);

nlohmann::json to_json(const FourierLoop& x);
FourierLoop loop_from_json(const nlohmann::json& j);

}  // namespace capax
