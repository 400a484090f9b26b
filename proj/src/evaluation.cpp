#include "tpemimo/evaluation.hpp"

#include <cmath>
#include <thread>

namespace tpemimo {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::rzf: return "rzf";
        case Scheme::tpe: return "tpe";
        case Scheme::tpeopt: return "tpeopt";
        case Scheme::mrt: return "mrt";
    }
    return "tpe";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "rzf") return Scheme::rzf;
    if (name == "tpe") return Scheme::tpe;
    if (name == "tpeopt") return Scheme::tpeopt;
    if (name == "mrt") return Scheme::mrt;
    throw ConfigError("unknown scheme: " + name);
}

SinrReport empirical_sinr_direct(const MatC& H, const MatC& G, double sigma2) {
    if (H.rows() != G.rows() || H.cols() != G.cols())
        throw ConfigError("empirical_sinr_direct: dimension mismatch");
    const int K = static_cast<int>(H.cols());

    const MatC F = H.adjoint() * G;  // F(k,n) = h_k^H g_n
    SinrReport rep;
    rep.per_user_sinr.resize(K);
    rep.per_user_rate_bits.resize(K);
    for (int k = 0; k < K; ++k) {
        const double signal = std::norm(F(k, k));
        const double interference = F.row(k).squaredNorm() - signal;
        rep.per_user_sinr(k) = signal / (interference + sigma2);
        rep.per_user_rate_bits(k) = std::log2(1.0 + rep.per_user_sinr(k));
    }
    rep.mean_rate_bits = rep.per_user_rate_bits.mean();
    return rep;
}

TrialForms trial_quadratic_forms(const MatC& H, const MatC& Hhat,
                                 const PowerAllocation& alloc, int J) {
    const int K = static_cast<int>(H.cols());
    if (Hhat.rows() != H.rows() || Hhat.cols() != K)
        throw ConfigError("quadratic_forms: dimension mismatch");
    if (alloc.p.size() != K) throw ConfigError("quadratic_forms: allocation size");
    const double inv_k = 1.0 / double(K);

    // V_l = (Hhat Hhat^H / K)^l H, all users at once.
    std::vector<MatC> V(J);
    std::vector<MatC> Y(J);  // Y_l = Hhat^H V_l
    V[0] = H;
    Y[0].noalias() = Hhat.adjoint() * H;
    for (int l = 1; l < J; ++l) {
        V[l].noalias() = inv_k * (Hhat * Y[l - 1]);
        Y[l].noalias() = Hhat.adjoint() * V[l];
    }

    // u_l per user: column-wise inner product of V_l with Hhat.
    MatC U(J, K);
    for (int l = 0; l < J; ++l)
        U.row(l) = (V[l].conjugate().cwiseProduct(Hhat)).colwise().sum();

    TrialForms tf;
    tf.A.assign(K, MatC(J, J));
    tf.B.assign(K, MatC(J, J));
    tf.A_mean = MatC::Zero(J, J);
    tf.B_mean = MatC::Zero(J, J);
    for (int k = 0; k < K; ++k) {
        MatC& A = tf.A[k];
        MatC& B = tf.B[k];
        for (int l = 0; l < J; ++l) {
            for (int m = 0; m < J; ++m) {
                A(l, m) = (alloc.p(k) * inv_k) * U(l, k) * std::conj(U(m, k));
                cxd bfull = 0.0;
                for (int j = 0; j < K; ++j)
                    bfull += alloc.p(j) * std::conj(Y[l](j, k)) * Y[m](j, k);
                B(l, m) = inv_k * bfull - A(l, m);
            }
        }
        tf.A_mean += A;
        tf.B_mean += B;
    }
    tf.A_mean /= double(K);
    tf.B_mean /= double(K);

    // C(l,m) = tr(Gram^{l+m+1} P), Gram = Hhat^H Hhat / K: depends on l+m
    // only, so C is Hankel by construction.
    const MatC gram = inv_k * (Hhat.adjoint() * Hhat);
    tf.C.resize(J, J);
    MatC gpow = gram;
    std::vector<double> diag_sum(2 * J - 1);
    for (int q = 0; q < 2 * J - 1; ++q) {
        if (q > 0) gpow = (gpow * gram).eval();
        double tr = 0.0;
        for (int j = 0; j < K; ++j) tr += alloc.p(j) * gpow(j, j).real();
        diag_sum[q] = tr;
    }
    for (int l = 0; l < J; ++l)
        for (int m = 0; m < J; ++m) tf.C(l, m) = diag_sum[l + m];
    return tf;
}

QuadraticForms quadratic_forms(const MatC& H, const MatC& Hhat,
                               const PowerAllocation& alloc, int J, int k) {
    const int K = static_cast<int>(H.cols());
    if (k < 0 || k >= K) throw ConfigError("quadratic_forms: user index");
    TrialForms tf = trial_quadratic_forms(H, Hhat, alloc, J);
    QuadraticForms qf;
    qf.A = std::move(tf.A[k]);
    qf.B = std::move(tf.B[k]);
    qf.C = std::move(tf.C);
    qf.user = k;
    return qf;
}

double sinr_from_quadratics(const TpeWeights& w, const QuadraticForms& qf,
                            double sigma2) {
    if (w.order() != qf.A.rows())
        throw ConfigError("sinr_from_quadratics: order mismatch");
    const VecC wc = w.w.cast<cxd>();
    const double num = (wc.adjoint() * qf.A * wc)(0).real();
    const double den = (wc.adjoint() * qf.B * wc)(0).real() + sigma2;
    return num / den;
}

namespace {

double quad(const VecR& w, const MatC& m) {
    cxd acc = 0.0;
    for (int l = 0; l < w.size(); ++l)
        for (int r = 0; r < w.size(); ++r) acc += w(l) * w(r) * m(l, r);
    return acc.real();
}

double quad(const VecR& w, const MatR& m) { return w.dot(m * w); }

struct TrialRow {
    double mean_rate = 0.0;
    VecR class_rates;
    double prenorm_power = 0.0;
};

struct PointSetup {
    double snr_db = 0.0;
    double P = 0.0;
    PowerAllocation alloc;
    VecR w_tpe;           // deterministic-equivalent weights (tpe scheme)
    VecR gamma_k;         // large-system SINR per user (tpe scheme)
    double xi_star = 0.0; // rzf regularization
    VecR theta_k;         // large-system RZF SINR per user
};

VecR rates_to_class_means(const VecR& rates, const PowerAllocation& alloc) {
    const int n = alloc.num_classes;
    VecR out = VecR::Zero(n);
    if (n == 1) {
        out(0) = rates.mean();
        return out;
    }
    VecR count = VecR::Zero(n);
    for (int k = 0; k < rates.size(); ++k) {
        out(alloc.class_of_user[k]) += rates(k);
        count(alloc.class_of_user[k]) += 1.0;
    }
    return out.cwiseQuotient(count);
}

}  // namespace

std::vector<RateStats> run_sweep(const Scenario& sc,
                                 const std::vector<double>& snr_grid,
                                 const std::vector<Scheme>& schemes, int trials,
                                 std::uint64_t seed, int threads) {
    if (trials < 1) throw ConfigError("run_sweep: trials must be >= 1");
    if (snr_grid.empty()) throw ConfigError("run_sweep: empty SNR grid");
    if (schemes.empty()) throw ConfigError("run_sweep: no schemes given");

    const int K = sc.K;
    const int J = sc.J;
    const CovarianceOperator cov = build_covariance(sc.cov_spec);
    if (cov.M != sc.M) throw ConfigError("run_sweep: covariance dimension");

    const PowerAllocation alloc_shape =
        sc.class_weights.empty() ? uniform_power(1.0, K)
                                 : class_power(sc.class_weights, K);
    const int num_classes = alloc_shape.num_classes;

    bool need_forms = false;
    bool need_tables = false;
    bool need_rzf = false;
    for (Scheme s : schemes) {
        if (s == Scheme::tpe || s == Scheme::tpeopt || s == Scheme::mrt)
            need_forms = true;
        if (s == Scheme::tpe && !sc.pinned_weights) need_tables = true;
        if (s == Scheme::rzf) need_rzf = true;
    }
    if (sc.pinned_weights && sc.pinned_weights->order() != J)
        throw ConfigError("pinned weights order does not match J");

    DerivativeTables tables;
    if (need_tables) tables = derivative_cascade(cov, K, J);

    // Per-point deterministic work: allocation, weights, regularization.
    std::vector<PointSetup> points(snr_grid.size());
    for (size_t s = 0; s < snr_grid.size(); ++s) {
        PointSetup& pt = points[s];
        pt.snr_db = snr_grid[s];
        pt.P = sc.sigma2 * std::pow(10.0, snr_grid[s] / 10.0);
        pt.alloc = sc.class_weights.empty()
                       ? uniform_power(pt.P, K)
                       : class_power(sc.class_weights, K);
        SystemConfig cfg{sc.M, K, pt.P, sc.sigma2, sc.tau, J};
        validate_config(cfg, pt.alloc);

        const double rho = pt.P / sc.sigma2;
        for (Scheme sch : schemes) {
            if (sch == Scheme::tpe) {
                if (sc.pinned_weights) {
                    pt.w_tpe = sc.pinned_weights->w;
                    pt.gamma_k = VecR();
                } else {
                    AsymptoticMatrices mats = assemble_matrices(tables, sc.tau, J);
                    OptimizationResult opt =
                        optimal_weights(mats, pt.P, sc.sigma2, pt.alloc);
                    pt.w_tpe = opt.weights.w;
                    pt.gamma_k = opt.gamma_k;
                }
            } else if (sch == Scheme::rzf) {
                pt.xi_star =
                    rzf_optimal_regularization(cov, K, sc.tau, rho);
                pt.theta_k.resize(K);
                const double trP = pt.alloc.trace();
                for (int k = 0; k < K; ++k)
                    pt.theta_k(k) = rzf_asymptotic_sinr(
                        cov, K, pt.xi_star, sc.tau, rho, pt.alloc.p(k), trP);
            }
        }
    }

    const size_t n_rows = schemes.size() * snr_grid.size();
    std::vector<std::vector<TrialRow>> slots(
        trials, std::vector<TrialRow>(n_rows));

    const double shape_trace = alloc_shape.trace();
    auto run_trial = [&](int t) {
        const ChannelSample smp = sample_pair(cov, K, sc.tau, seed, t);
        TrialForms tf;
        if (need_forms)
            tf = trial_quadratic_forms(smp.H, smp.Hhat, alloc_shape, J);

        // Shared RZF pieces: Gram and cross products do not depend on SNR.
        MatC gram0, cross;
        if (need_rzf) {
            gram0 = (smp.Hhat.adjoint() * smp.Hhat) / double(K);
            cross = smp.H.adjoint() * smp.Hhat;  // h_k^H hhat_n
        }

        for (size_t si = 0; si < schemes.size(); ++si) {
            const Scheme sch = schemes[si];
            for (size_t s = 0; s < snr_grid.size(); ++s) {
                const PointSetup& pt = points[s];
                TrialRow& row = slots[t][si * snr_grid.size() + s];
                VecR rates(K);

                if (sch == Scheme::rzf) {
                    MatC reg = gram0;
                    reg.diagonal().array() += pt.xi_star;
                    Eigen::LLT<MatC> llt(reg);
                    if (llt.info() != Eigen::Success)
                        throw NumericError("rzf factorization failed");
                    MatC rhs = MatC::Zero(K, K);
                    rhs.diagonal() = alloc_shape.p.cwiseSqrt().cast<cxd>();
                    const MatC inner = llt.solve(rhs);
                    const double power =
                        (inner.adjoint() * (gram0 * inner)).trace().real();
                    if (power <= 0.0)
                        throw NumericError("rzf produced a zero precoder");
                    const double beta2 = pt.P / power;
                    // F(k,n) = h_k^H g_n scaled so tr(G G^H) = P
                    const MatC F =
                        std::sqrt(beta2 / double(K)) * (cross * inner);
                    for (int k = 0; k < K; ++k) {
                        const double sig = std::norm(F(k, k));
                        const double intf = F.row(k).squaredNorm() - sig;
                        rates(k) = std::log2(1.0 + sig / (intf + sc.sigma2));
                    }
                    row.prenorm_power = power;
                } else {
                    VecR w;
                    if (sch == Scheme::tpe) {
                        w = pt.w_tpe;
                    } else if (sch == Scheme::mrt) {
                        w = VecR::Zero(J);
                        w(0) = 1.0;
                    } else {  // tpeopt
                        // Shape-scaled forms: the optimizer output is
                        // scale-consistent with the SINR evaluation below.
                        OptimizationResult opt = empirical_optimal_weights(
                            tf.A_mean, tf.B_mean, tf.C.cast<cxd>(), pt.P,
                            sc.sigma2);
                        w = opt.weights.w;
                    }
                    // Renormalize to the exact per-realization power
                    // constraint: tr(G G^H) = w' C w.
                    const double used = quad(w, tf.C);
                    if (!(used > 0.0))
                        throw NumericError("tpe produced a zero precoder");
                    row.prenorm_power = used * pt.alloc.trace() / shape_trace;
                    const VecR wn = w * std::sqrt(pt.P / used);
                    for (int k = 0; k < K; ++k) {
                        const double num = quad(wn, tf.A[k]);
                        const double den = quad(wn, tf.B[k]) + sc.sigma2;
                        rates(k) = std::log2(1.0 + num / den);
                    }
                }

                row.mean_rate = rates.mean();
                row.class_rates = rates_to_class_means(rates, alloc_shape);
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(threads, trials));
    if (n_workers == 1) {
        for (int t = 0; t < trials; ++t) {
            try {
                run_trial(t);
            } catch (const std::exception& e) {
                throw NumericError("trial " + std::to_string(t) + ": " + e.what());
            }
        }
    } else {
        std::vector<std::thread> pool;
        std::vector<std::string> errors(n_workers);
        for (int wkr = 0; wkr < n_workers; ++wkr) {
            pool.emplace_back([&, wkr]() {
                for (int t = wkr; t < trials; t += n_workers) {
                    try {
                        run_trial(t);
                    } catch (const std::exception& e) {
                        errors[wkr] = "trial " + std::to_string(t) + ": " + e.what();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& err : errors)
            if (!err.empty()) throw NumericError(err);
    }

    // Deterministic reduction in trial order.
    std::vector<RateStats> out(n_rows);
    for (size_t si = 0; si < schemes.size(); ++si) {
        for (size_t s = 0; s < snr_grid.size(); ++s) {
            const size_t idx = si * snr_grid.size() + s;
            RateStats& rs = out[idx];
            rs.scheme = schemes[si];
            rs.snr_db = snr_grid[s];
            rs.tau = sc.tau;
            rs.J = J;
            rs.trials = trials;
            rs.seed = seed;

            double sum = 0.0, sumsq = 0.0, prenorm = 0.0;
            VecR class_sum = VecR::Zero(num_classes);
            for (int t = 0; t < trials; ++t) {
                const TrialRow& row = slots[t][idx];
                sum += row.mean_rate;
                sumsq += row.mean_rate * row.mean_rate;
                class_sum += row.class_rates;
                prenorm += row.prenorm_power;
            }
            rs.mean_rate_bits = sum / trials;
            const double var =
                trials > 1
                    ? std::max(0.0, (sumsq - sum * sum / trials) / (trials - 1))
                    : 0.0;
            rs.stderr_bits = std::sqrt(var / trials);
            rs.class_mean_bits = class_sum / trials;
            rs.mean_prenorm_power = prenorm / trials;

            const PointSetup& pt = points[s];
            const VecR* de = nullptr;
            if (schemes[si] == Scheme::tpe && pt.gamma_k.size() > 0)
                de = &pt.gamma_k;
            else if (schemes[si] == Scheme::rzf)
                de = &pt.theta_k;
            if (de) {
                rs.de_class_bits.resize(num_classes);
                VecR de_rates(K);
                for (int k = 0; k < K; ++k)
                    de_rates(k) = std::log2(1.0 + (*de)(k));
                rs.de_class_bits = rates_to_class_means(de_rates, alloc_shape);
                rs.de_rate_bits = de_rates.mean();
            }
        }
    }
    return out;
}

RateStats monte_carlo_rate(const Scenario& sc, Scheme scheme, double snr_db,
                           int trials, std::uint64_t seed, int threads) {
    return run_sweep(sc, {snr_db}, {scheme}, trials, seed, threads)[0];
}

std::vector<DeMcRow> asymptotic_vs_empirical(const Scenario& sc,
                                             const std::vector<double>& snr_grid,
                                             int trials, std::uint64_t seed,
                                             int threads) {
    const std::vector<RateStats> stats =
        run_sweep(sc, snr_grid, {Scheme::tpe, Scheme::rzf}, trials, seed,
                  threads);
    std::vector<DeMcRow> rows;
    for (const RateStats& rs : stats) {
        for (int c = 0; c < rs.class_mean_bits.size(); ++c) {
            DeMcRow r;
            r.scheme = rs.scheme;
            r.snr_db = rs.snr_db;
            r.class_id = c;
            r.de_rate_bits = rs.de_class_bits.size() ? rs.de_class_bits(c) : 0.0;
            r.mc_rate_bits = rs.class_mean_bits(c);
            r.gap_abs = std::abs(r.mc_rate_bits - r.de_rate_bits);
            r.gap_rel = r.de_rate_bits != 0.0 ? r.gap_abs / r.de_rate_bits : 0.0;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace tpemimo
