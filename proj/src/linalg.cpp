#include "poromem/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace poromem::lin {

double dot(const Vector& a, const Vector& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::fabs(x));
    return m;
}

void axpy(double alpha, const Vector& x, Vector& y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, Vector& x) {
    for (double& v : x) v *= alpha;
}

void project_zero_mean(Vector& p, const Vector& volume) {
    double vsum = 0.0, psum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        vsum += volume[i];
        psum += p[i] * volume[i];
    }
    if (vsum <= 0.0) return;
    const double mean = psum / vsum;
    for (double& v : p) v -= mean;
}

Vector cg_solve(const SparseOperator& op, const Vector& rhs, const CgOptions& opt, SolverStats* stats) {
    const std::size_t n = op.dim;
    assert(rhs.size() == n);
    long max_iter = opt.max_iter;
    if (max_iter <= 0) {
        max_iter = std::min<long>(50000, 20 * static_cast<long>(std::sqrt(static_cast<double>(n))) + 20);
    }
    const bool precond = !op.jacobi.empty();

    Vector x(n, 0.0);
    Vector r = rhs;
    if (opt.x0) {
        x = *opt.x0;
        Vector ax(n);
        op.apply(x, ax);
        for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    const double target = opt.tol * (1.0 + norm2(rhs));

    Vector z(n), d(n), ad(n);
    auto apply_precond = [&](const Vector& in, Vector& out) {
        if (precond) {
            for (std::size_t i = 0; i < n; ++i) out[i] = in[i] / op.jacobi[i];
        } else {
            out = in;
        }
    };

    double rnorm = norm2(r);
    long it = 0;
    if (rnorm > target) {
        apply_precond(r, z);
        d = z;
        double rho = dot(r, z);
        for (it = 1; it <= max_iter; ++it) {
            op.apply(d, ad);
            const double dad = dot(d, ad);
            if (!(dad > 0.0)) {
                throw SolverError("cg_solve: operator not positive definite on search direction", rnorm);
            }
            const double alpha = rho / dad;
            axpy(alpha, d, x);
            axpy(-alpha, ad, r);
            rnorm = norm2(r);
            if (rnorm <= target) break;
            apply_precond(r, z);
            const double rho_new = dot(r, z);
            const double beta = rho_new / rho;
            rho = rho_new;
            for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
        }
    }
    if (stats) {
        stats->iterations = it;
        stats->residual = rnorm;
    }
    if (rnorm > target) {
        throw SolverError("cg_solve: no convergence after " + std::to_string(max_iter) +
                              " iterations (residual " + std::to_string(rnorm) + ")",
                          rnorm);
    }
    return x;
}

// Preconditioned conjugate gradients on the pressure Schur complement
// S = B A^{-1} B^T, with the pressure mass (cell volumes) as preconditioner.
// The velocity iterate is tracked alongside the pressure so the final
// velocity solve only polishes; residuals of the full saddle system are
// verified explicitly before returning.
UzawaResult uzawa_solve(const SaddleSystem& sys, const UzawaOptions& opt) {
    const std::size_t nu = sys.A.dim;
    const std::size_t np = sys.pressure_dim;
    UzawaResult res;
    res.pressure.assign(np, 0.0);
    if (opt.p0) {
        res.pressure = *opt.p0;
        if (sys.zero_mean_pressure) project_zero_mean(res.pressure, sys.pressure_volume);
    }

    long inner_total = 0;
    const double inner_tol = std::max(1e-13, opt.tol * 1e-2);
    auto solve_A = [&](const Vector& rhs, const Vector* warm) {
        CgOptions c;
        c.tol = inner_tol;
        c.x0 = warm;
        SolverStats st;
        Vector out = cg_solve(sys.A, rhs, c, &st);
        inner_total += st.iterations;
        return out;
    };

    Vector bt(nu), u(nu), tmp_u(nu), r(np), z(np), d(np), sd(np), t(nu);
    // u = A^{-1} (f - B^T p)
    sys.apply_grad(res.pressure, bt);
    Vector rhs0 = sys.f;
    axpy(-1.0, bt, rhs0);
    u = solve_A(rhs0, nullptr);

    // Schur residual r = B u - g
    sys.apply_div(u, r);
    axpy(-1.0, sys.g, r);
    if (sys.zero_mean_pressure) project_zero_mean(r, sys.pressure_volume);

    const double div_target = opt.tol * (1.0 + norm2(sys.g));
    const double mom_target = opt.tol * (1.0 + norm2(sys.f));

    double rho = 0.0;
    bool fresh = true;
    long outer = 0;
    double prev_rnorm = norm2(r);
    long stall = 0;
    while (outer < opt.max_outer) {
        if (norm2(r) <= div_target) break;
        ++outer;
        for (std::size_t i = 0; i < np; ++i) z[i] = r[i] / sys.pressure_volume[i];
        if (sys.zero_mean_pressure) project_zero_mean(z, sys.pressure_volume);
        const double rho_new = dot(r, z);
        if (fresh) {
            d = z;
            fresh = false;
        } else {
            const double beta = rho_new / rho;
            for (std::size_t i = 0; i < np; ++i) d[i] = z[i] + beta * d[i];
        }
        rho = rho_new;

        sys.apply_grad(d, bt);
        t = solve_A(bt, nullptr);
        sys.apply_div(t, sd);
        if (sys.zero_mean_pressure) project_zero_mean(sd, sys.pressure_volume);
        const double dsd = dot(d, sd);
        if (!(dsd > 0.0)) {
            throw SolverError("uzawa_solve: Schur complement not positive on search direction",
                              0.0, norm2(r));
        }
        const double alpha = rho / dsd;
        axpy(alpha, d, res.pressure);
        axpy(-alpha, t, u);
        axpy(-alpha, sd, r);

        const double rn = norm2(r);
        if (rn > 0.999 * prev_rnorm) {
            if (++stall > 50) {
                sys.apply_grad(res.pressure, bt);
                Vector mres = sys.f;
                axpy(-1.0, bt, mres);
                Vector au(nu);
                sys.A.apply(u, au);
                axpy(-1.0, au, mres);
                throw SolverError("uzawa_solve: stagnation", norm2(mres), rn);
            }
        } else {
            stall = 0;
        }
        prev_rnorm = rn;
    }
    if (sys.zero_mean_pressure) project_zero_mean(res.pressure, sys.pressure_volume);

    // Polish the velocity and verify the coupled residuals.
    sys.apply_grad(res.pressure, bt);
    Vector rhs_final = sys.f;
    axpy(-1.0, bt, rhs_final);
    {
        CgOptions c;
        c.tol = std::max(1e-13, opt.tol * 1e-3);
        c.x0 = &u;
        SolverStats st;
        u = cg_solve(sys.A, rhs_final, c, &st);
        inner_total += st.iterations;
    }

    Vector au(nu);
    sys.A.apply(u, au);
    Vector mres = rhs_final;
    axpy(-1.0, au, mres);
    sys.apply_div(u, r);
    axpy(-1.0, sys.g, r);

    res.velocity = std::move(u);
    res.outer_iterations = outer;
    res.inner_iterations = inner_total;
    res.momentum_residual = norm2(mres);
    res.divergence_residual = norm2(r);
    if (res.momentum_residual > mom_target || res.divergence_residual > 10.0 * div_target) {
        throw SolverError("uzawa_solve: residual targets not met", res.momentum_residual,
                          res.divergence_residual);
    }
    return res;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
    assert(static_cast<int>(a.size()) == n * n);
    auto at = [&](int i, int j) -> double& { return a[i * n + j]; };
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) (i == j ? diag : off) += a[i * n + j] * a[i * n + j];
    const double scale = std::sqrt(off + diag) + 1e-300;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double offn = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) offn += at(i, j) * at(i, j);
        if (std::sqrt(offn) <= 1e-15 * scale) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::fabs(apq) <= 1e-18 * scale) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double sgn = theta >= 0.0 ? 1.0 : -1.0;
                const double tau = sgn / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(tau * tau + 1.0);
                const double s = tau * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace poromem::lin
