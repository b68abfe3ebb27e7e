#ifndef POROMEM_LINALG_HPP
#define POROMEM_LINALG_HPP

// Shared sparse linear algebra: preconditioned conjugate gradients for SPD
// systems and a Schur-complement Uzawa iteration for Stokes-type saddle
// point systems, plus a small dense symmetric eigensolver.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace poromem::lin {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);
// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);
void scale(double alpha, Vector& x);

// Matrix-free operator. `jacobi` holds the diagonal when a Jacobi
// preconditioner is wanted; leave empty for the identity preconditioner.
struct SparseOperator {
    std::size_t dim = 0;
    bool symmetric = true;
    std::function<void(const Vector& x, Vector& y)> apply;
    Vector jacobi;
};

struct SolverStats {
    long iterations = 0;
    double residual = 0.0;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual_mom, double residual_div = 0.0)
        : std::runtime_error(what), momentum_residual(residual_mom), divergence_residual(residual_div) {}
    double momentum_residual;
    double divergence_residual;
};

struct CgOptions {
    double tol = 1e-8;   // relative: ||r|| <= tol * (1 + ||b||)
    long max_iter = 0;   // 0 -> 20*sqrt(n), capped at 50000
    const Vector* x0 = nullptr;
};

Vector cg_solve(const SparseOperator& op, const Vector& rhs, const CgOptions& opt = {},
                SolverStats* stats = nullptr);

// Saddle system  A u + B^T p = f,  B u = g.  The divergence B is in net-flux
// form; `pressure_volume` carries the cell volumes used for the pressure
// mass scaling and the zero-mean projection.
struct SaddleSystem {
    SparseOperator A;
    std::size_t pressure_dim = 0;
    std::function<void(const Vector& u, Vector& d)> apply_div;
    std::function<void(const Vector& p, Vector& f)> apply_grad;
    Vector f;
    Vector g;
    Vector pressure_volume;
    bool zero_mean_pressure = false;
};

struct UzawaOptions {
    double tol = 1e-8;
    long max_outer = 500;
    const Vector* p0 = nullptr;
};

struct UzawaResult {
    Vector velocity;
    Vector pressure;
    long outer_iterations = 0;
    long inner_iterations = 0;
    double momentum_residual = 0.0;
    double divergence_residual = 0.0;
};

UzawaResult uzawa_solve(const SaddleSystem& sys, const UzawaOptions& opt = {});

// subtract the volume-weighted mean so that sum(p*vol) == 0
void project_zero_mean(Vector& p, const Vector& volume);

// Eigenvalues of a dense symmetric n-by-n matrix (row-major), ascending.
// Cyclic Jacobi rotations; intended for the small tensor-form problems.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

} // namespace poromem::lin

#endif
