#include "tpemimo/asymptotics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace tpemimo {

namespace {

constexpr int kMaxOrder = 8;

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// tr(A B) without forming the product.
double trace_prod(const MatC& a, const MatC& b) {
    return (a.array() * b.transpose().array()).sum().real();
}

// Fixed-point iteration for delta(t) on the eigenvalues of Phi.  Damping
// engages only when the update direction alternates.
double delta_fixed_point(const VecR& lam, int K, double t, double tol,
                         int max_iter, int* iters, double* residual,
                         std::vector<double>* trace = nullptr) {
    double delta = lam.sum() / K;
    double prev_step = 0.0;
    bool oscillating = false;
    for (int it = 1; it <= max_iter; ++it) {
        const double denom_base = 1.0 + t * delta;
        double next = 0.0;
        for (int i = 0; i < lam.size(); ++i)
            next += lam(i) * denom_base / (denom_base + t * lam(i));
        next /= K;
        if (!std::isfinite(next))
            throw NumericError("solve_delta: iteration diverged");
        double step = next - delta;
        if (oscillating || (prev_step != 0.0 && step * prev_step < 0.0)) {
            oscillating = true;
            next = 0.5 * (delta + next);
            step = next - delta;
        }
        prev_step = step;
        delta = next;
        if (trace) trace->push_back(std::abs(step));
        if (std::abs(step) < tol) {
            if (iters) *iters = it;
            if (residual) *residual = std::abs(step);
            return delta;
        }
    }
    throw NumericError("solve_delta: no convergence after max_iter iterations");
}

// Eigenvalues of T(t) given the converged delta.
VecR resolvent_eigs(const VecR& lam, double t, double delta) {
    const double denom_base = 1.0 + t * delta;
    VecR s(lam.size());
    for (int i = 0; i < lam.size(); ++i)
        s(i) = denom_base / (denom_base + t * lam(i));
    return s;
}

struct RzfTraces {
    double delta;       // delta(1/xi)
    double gamma;       // (1/K) tr(T Phi T Phi)
    double tr_phi_t2;   // (1/K) tr(Phi T^2)
    double tr_phi_t3;   // (1/K) tr(Phi T^3)
    double tr_phi2_t3;  // (1/K) tr(Phi^2 T^3)
    double tr_phi2_t;   // (1/K) tr(Phi^2 T)
};

RzfTraces rzf_traces(const CovarianceOperator& cov, int K, double xi) {
    const double t = 1.0 / xi;
    RzfTraces r{};
    r.delta = delta_fixed_point(cov.eigvals, K, t, 1e-12, 10000, nullptr, nullptr);
    const VecR s = resolvent_eigs(cov.eigvals, t, r.delta);
    for (int i = 0; i < cov.eigvals.size(); ++i) {
        const double l = cov.eigvals(i);
        const double si = s(i);
        r.gamma += l * l * si * si;
        r.tr_phi_t2 += l * si * si;
        r.tr_phi_t3 += l * si * si * si;
        r.tr_phi2_t3 += l * l * si * si * si;
        r.tr_phi2_t += l * l * si;
    }
    r.gamma /= K;
    r.tr_phi_t2 /= K;
    r.tr_phi_t3 /= K;
    r.tr_phi2_t3 /= K;
    r.tr_phi2_t /= K;
    return r;
}

MatR beta_recursion(const MatR& s_ptpt, int J) {
    // symmetric in (l,m); the lower triangle is mirrored so the table is
    // symmetric exactly
    MatR beta = MatR::Zero(J + 1, J + 1);
    for (int l = 0; l <= J; ++l) {
        for (int m = l; m <= J; ++m) {
            double v = s_ptpt(l, m);
            for (int k = 1; k <= l; ++k)
                for (int n = 1; n <= m; ++n)
                    v += k * n * binom(l, k) * binom(m, n) * beta(k - 1, n - 1) *
                         s_ptpt(l - k, m - n);
            beta(l, m) = v;
            beta(m, l) = v;
        }
    }
    return beta;
}

MatR c_recursion(const MatR& beta, const MatR& s_ptt, int J) {
    MatR c = MatR::Zero(J + 1, J + 1);
    for (int l = 0; l <= J; ++l) {
        for (int m = l; m <= J; ++m) {
            double v = s_ptt(l, m);
            for (int k = 1; k <= l; ++k)
                for (int n = 1; n <= m; ++n)
                    v += k * n * binom(l, k) * binom(m, n) * beta(k - 1, n - 1) *
                         s_ptt(l - k, m - n);
            c(l, m) = v;
            c(m, l) = v;
        }
    }
    return c;
}

}  // namespace

FixedPointResult solve_delta(const CovarianceOperator& cov, int K, double t,
                             double tol, int max_iter,
                             std::vector<double>* residual_trace) {
    if (K < 1) throw ConfigError("solve_delta: K must be >= 1");
    FixedPointResult r;
    r.t = t;
    if (t == 0.0) {
        r.delta = cov.eigvals.sum() / K;
        r.T = MatC::Identity(cov.M, cov.M);
        r.iterations = 0;
        r.residual = 0.0;
        return r;
    }
    r.delta = delta_fixed_point(cov.eigvals, K, t, tol, max_iter, &r.iterations,
                                &r.residual, residual_trace);
    const VecR s = resolvent_eigs(cov.eigvals, t, r.delta);
    r.T = cov.eigvecs * s.asDiagonal() * cov.eigvecs.adjoint();
    return r;
}

DerivativeTables derivative_cascade(const CovarianceOperator& cov, int K, int J) {
    if (J < 1) throw ConfigError("derivative_cascade: J must be >= 1");
    if (J > kMaxOrder)
        throw ConfigError("derivative_cascade: order above supported cap of 8");

    const int M = cov.M;
    const MatC& phi = cov.phi;

    DerivativeTables tb;
    tb.J = J;
    tb.delta_q = VecR::Zero(J + 1);
    tb.f_q = VecR::Zero(J + 1);
    tb.T_q.assign(J + 1, MatC());
    tb.Tau_q.assign(J + 1, MatC());

    std::vector<MatC> phi_t(J + 1);  // Phi * T^(q)
    tb.T_q[0] = MatC::Identity(M, M);
    phi_t[0] = phi;
    tb.delta_q(0) = phi.trace().real() / K;
    tb.f_q(0) = -1.0;

    for (int i = 1; i <= J; ++i) {
        // T^(i) = sum_{n<i} sum_{j<=n} binom(i-1,n) binom(n,j)
        //         * T^(i-1-n) R^(n-j+1) T^(j),  R^(q) = q f^(q-1) Phi
        MatC acc = MatC::Zero(M, M);
        for (int n = 0; n < i; ++n) {
            for (int j = 0; j <= n; ++j) {
                const int q = n - j + 1;
                const double coeff =
                    binom(i - 1, n) * binom(n, j) * q * tb.f_q(q - 1);
                acc.noalias() += coeff * (tb.T_q[i - 1 - n] * phi_t[j]);
            }
        }
        tb.T_q[i] = acc;

        // From f(t) (1 + t delta(t)) = -1:
        //   f^(i) = -sum_{j<i} binom(i,j) (i-j) delta^(i-j-1) f^(j)
        double f = 0.0;
        for (int j = 0; j < i; ++j)
            f -= binom(i, j) * double(i - j) * tb.f_q(j) * tb.delta_q(i - j - 1);
        tb.f_q(i) = f;

        phi_t[i].noalias() = phi * tb.T_q[i];
        tb.delta_q(i) = phi_t[i].trace().real() / K;
    }

    // Tau^(l) = -sum_n binom(l,n) T^(n) f^(l-n)
    for (int l = 0; l <= J; ++l) {
        MatC acc = MatC::Zero(M, M);
        for (int n = 0; n <= l; ++n)
            acc += binom(l, n) * tb.f_q(l - n) * tb.T_q[n];
        tb.Tau_q[l] = -acc;
    }

    std::vector<MatC> phi_tau(J + 1);
    for (int a = 0; a <= J; ++a) phi_tau[a].noalias() = phi * tb.Tau_q[a];

    tb.trace_ptpt = MatR::Zero(J + 1, J + 1);
    tb.trace_ptt = MatR::Zero(J + 1, J + 1);
    for (int a = 0; a <= J; ++a) {
        for (int b = a; b <= J; ++b) {
            tb.trace_ptpt(a, b) = trace_prod(phi_tau[a], phi_tau[b]) / K;
            tb.trace_ptpt(b, a) = tb.trace_ptpt(a, b);
            tb.trace_ptt(a, b) = trace_prod(phi_tau[a], tb.Tau_q[b]) / K;
            tb.trace_ptt(b, a) = tb.trace_ptt(a, b);
        }
    }

    tb.beta = beta_recursion(tb.trace_ptpt, J);
    tb.c = c_recursion(tb.beta, tb.trace_ptt, J);
    return tb;
}

MatR beta_table(const CovarianceOperator& cov, int K,
                const std::vector<MatC>& Tau_q) {
    const int J = static_cast<int>(Tau_q.size()) - 1;
    if (J < 0) throw ConfigError("beta_table: empty Tau table");
    MatR s = MatR::Zero(J + 1, J + 1);
    std::vector<MatC> phi_tau(J + 1);
    for (int a = 0; a <= J; ++a) phi_tau[a].noalias() = cov.phi * Tau_q[a];
    for (int a = 0; a <= J; ++a)
        for (int b = a; b <= J; ++b) {
            s(a, b) = trace_prod(phi_tau[a], phi_tau[b]) / K;
            s(b, a) = s(a, b);
        }
    return beta_recursion(s, J);
}

AsymptoticMatrices assemble_matrices(DerivativeTables& tb, double tau,
                                     int J_out) {
    if (J_out < 0) J_out = tb.J;
    if (J_out < 1 || J_out > tb.J + 1)
        throw ConfigError("assemble_matrices: J_out out of range");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("assemble_matrices: tau must lie in [0,1]");

    const int J = tb.J;
    const double csi = 1.0 - tau * tau;

    // (delta f)^(l) by the Leibniz rule
    VecR df(J + 1);
    for (int l = 0; l <= J; ++l) {
        double v = 0.0;
        for (int k = 0; k <= l; ++k)
            v += binom(l, k) * tb.delta_q(k) * tb.f_q(l - k);
        df(l) = v;
    }

    tb.Xbar = MatR::Zero(J + 1, J + 1);
    tb.bbar = MatR::Zero(J + 1, J + 1);
    for (int l = 0; l <= J; ++l) {
        for (int m = l; m <= J; ++m) {
            tb.Xbar(l, m) = csi * df(l) * df(m);
            tb.Xbar(m, l) = tb.Xbar(l, m);
            double conv = 0.0;
            for (int k = 0; k <= l; ++k)
                for (int n = 0; n <= m; ++n)
                    conv += binom(l, k) * binom(m, n) * tb.f_q(k) * tb.f_q(n) *
                            tb.beta(l - k, m - n);
            tb.bbar(l, m) = tau * tau * tb.beta(l, m) + csi * conv;
            tb.bbar(m, l) = tb.bbar(l, m);
        }
    }

    AsymptoticMatrices out;
    out.tau = tau;
    out.A.resize(J_out, J_out);
    out.B.resize(J_out, J_out);
    out.C.resize(J_out, J_out);
    for (int l = 0; l < J_out; ++l) {
        for (int m = 0; m < J_out; ++m) {
            const double scale =
                (((l + m) % 2 == 0) ? 1.0 : -1.0) / (factorial(l) * factorial(m));
            out.A(l, m) = scale * tb.Xbar(l, m);
            out.B(l, m) = scale * tb.bbar(l, m);
            out.C(l, m) = scale * tb.c(l, m);
        }
    }
    return out;
}

double rzf_asymptotic_sinr(const CovarianceOperator& cov, int K, double xi,
                           double tau, double rho, double p_k, double trP) {
    if (!(xi > 0.0)) throw ConfigError("rzf_asymptotic_sinr: xi must be positive");
    const RzfTraces r = rzf_traces(cov, K, xi);
    const double d = r.delta;
    const double shifted = (xi + d) * (xi + d);
    const double num = (1.0 - tau * tau) * (p_k / (trP / K)) * d * d *
                       (shifted - r.gamma);
    const double den =
        r.gamma * (xi * xi - tau * tau * (xi * xi - shifted)) +
        r.tr_phi_t2 * shifted / rho;
    return num / den;
}

double rzf_optimal_regularization(const CovarianceOperator& cov, int K,
                                  double tau, double rho, double tol,
                                  int max_iter) {
    if (!(rho > 0.0))
        throw ConfigError("rzf_optimal_regularization: rho must be positive");
    const double t2 = tau * tau;

    double xi = 1.0 / rho;
    double prev_step = 0.0;
    bool oscillating = false;
    for (int it = 1; it <= max_iter; ++it) {
        const RzfTraces r = rzf_traces(cov, K, xi);
        const double nu = (xi * r.tr_phi_t3 / (r.gamma * r.tr_phi_t2)) *
                          (r.gamma / r.tr_phi_t2 - r.tr_phi2_t3 / r.tr_phi_t3);
        const double shifted = (xi + r.delta) * (xi + r.delta);
        const double num = 1.0 + nu + t2 * rho * r.gamma / r.tr_phi2_t;
        const double den =
            (1.0 - t2) * (1.0 + nu) + t2 * nu * shifted / (xi * xi);
        double next = num / (rho * den);
        if (!(next > 0.0) || !std::isfinite(next))
            throw NumericError("rzf_optimal_regularization: iterate left (0,inf)");
        double step = next - xi;
        if (oscillating || (prev_step != 0.0 && step * prev_step < 0.0)) {
            oscillating = true;
            next = 0.5 * (xi + next);
            step = next - xi;
        }
        prev_step = step;
        xi = next;
        if (std::abs(step) < tol * std::max(1.0, xi)) return xi;
    }
    throw NumericError(
        "rzf_optimal_regularization: no convergence after max_iter iterations");
}

std::string tables_to_json(const DerivativeTables& tb) {
    nlohmann::json j;
    char key[32];
    for (int q = 0; q <= tb.J; ++q) {
        std::snprintf(key, sizeof(key), "delta_q/%d", q);
        j[key] = tb.delta_q(q);
        std::snprintf(key, sizeof(key), "f_q/%d", q);
        j[key] = tb.f_q(q);
    }
    auto put = [&](const char* name, const MatR& m) {
        if (m.size() == 0) return;
        for (int l = 0; l <= tb.J; ++l)
            for (int r = 0; r <= tb.J; ++r) {
                std::snprintf(key, sizeof(key), "%s/%d,%d", name, l, r);
                j[key] = m(l, r);
            }
    };
    put("beta", tb.beta);
    put("c", tb.c);
    put("Xbar", tb.Xbar);
    put("bbar", tb.bbar);
    return j.dump(2);
}

}  // namespace tpemimo
