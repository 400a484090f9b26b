// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one pass/fail line per criterion.  Exit code is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "tpemimo/complexity.hpp"
#include "tpemimo/evaluation.hpp"
#include "tpemimo/experiments.hpp"

using namespace tpemimo;
namespace fs = std::filesystem;

namespace {

constexpr double kLog2E = 1.4426950408889634;

struct Checker {
    bool ok = true;
    std::string why;
    std::ostringstream note;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

Scenario exp_scenario(int M, int K, int J, double tau) {
    Scenario sc;
    sc.M = M;
    sc.K = K;
    sc.J = J;
    sc.tau = tau;
    sc.cov_spec = CovarianceSpec::exponential(0.1, M);
    return sc;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- 1 ---
void criterion_complexity(Checker& c) {
    const std::int64_t M = 500, K = 100;
    std::vector<double> tcs = {402};
    for (double t = 410; t <= 910; t += 20) tcs.push_back(t);

    static const std::int64_t rzf_series[] = {
        30473033, 30871033, 31866033, 32861033, 33856033, 34851033, 35846033,
        36841033, 37836033, 38831033, 39826033, 40821033, 41816033, 42811033,
        43806033, 44801033, 45796033, 46791033, 47786033, 48781033, 49776033,
        50771033, 51766033, 52761033, 53756033, 54751033, 55746033};
    static const std::int64_t rzf2_series[] = {
        11522633, 12319033, 14310033, 16301033, 18292033, 20283033, 22274033,
        24265033, 26256033, 28247033, 30238033, 32229033, 34220033, 36211033,
        38202033, 40193033, 42184033, 44175033, 46166033, 48157033, 50148033,
        52139033, 54130033, 56121033, 58112033, 60103033, 62094033};
    static const std::int64_t tpe_series[5][27] = {
        {100100,   500500,   1501500,  2502500,  3503500,  4504500,  5505500,
         6506500,  7507500,  8508500,  9509500,  10510500, 11511500, 12512500,
         13513500, 14514500, 15515500, 16516500, 17517500, 18518500, 19519500,
         20520500, 21521500, 22522500, 23523500, 24524500, 25525500},
        {300500,   1502500,  4507500,  7512500,  10517500, 13522500, 16527500,
         19532500, 22537500, 25542500, 28547500, 31552500, 34557500, 37562500,
         40567500, 43572500, 46577500, 49582500, 52587500, 55592500, 58597500,
         61602500, 64607500, 67612500, 70617500, 73622500, 76627500},
        {500900,   2504500,  7513500,  12522500, 17531500, 22540500, 27549500,
         32558500, 37567500, 42576500, 47585500, 52594500, 57603500, 62612500,
         67621500, 72630500, 77639500, 82648500, 87657500, 92666500, 97675500,
         102684500, 107693500, 112702500, 117711500, 122720500, 127729500},
        {701300,   3506500,  10519500, 17532500, 24545500, 31558500, 38571500,
         45584500, 52597500, 59610500, 66623500, 73636500, 80649500, 87662500,
         94675500, 101688500, 108701500, 115714500, 122727500, 129740500,
         136753500, 143766500, 150779500, 157792500, 164805500, 171818500,
         178831500},
        {901700,   4508500,  13525500, 22542500, 31559500, 40576500, 49593500,
         58610500, 67627500, 76644500, 85661500, 94678500, 103695500,
         112712500, 121729500, 130746500, 139763500, 148780500, 157797500,
         166814500, 175831500, 184848500, 193865500, 202882500, 211899500,
         220916500, 229933500}};

    const std::int64_t offset = rzf_sweep_offset(M, K);
    for (size_t i = 0; i < tcs.size(); ++i) {
        ComplexityInputs in{M, K, 1, data_symbols(tcs[i], 0.5, 2.0, K)};
        for (int J = 1; J <= 5; ++J) {
            in.J = J;
            const std::int64_t got =
                ops_per_coherence(PrecScheme::tpe, in).per_coherence_ops;
            c.require(got == tpe_series[J - 1][i],
                      "tpe J=" + std::to_string(J) + " T_c=" +
                          std::to_string((int)tcs[i]) + " got " +
                          std::to_string(got));
        }
        in.J = 1;
        const std::int64_t r2 =
            ops_per_coherence(PrecScheme::rzf2, in).per_coherence_ops;
        c.require(r2 == rzf2_series[i],
                  "rzf2 T_c=" + std::to_string((int)tcs[i]) + " got " +
                      std::to_string(r2));
        const std::int64_t r1 =
            ops_per_coherence(PrecScheme::rzf, in).per_coherence_ops;
        c.require(rzf_series[i] - r1 == offset,
                  "rzf offset at T_c=" + std::to_string((int)tcs[i]) + " is " +
                      std::to_string(rzf_series[i] - r1));
    }
    c.note << "162 sweep points exact, rzf offset constant " << offset;
}

// ---------------------------------------------------------------- 2 ---
void criterion_fixed_points(Checker& c) {
    const CovarianceOperator id64 =
        build_covariance(CovarianceSpec::identity(64));
    const double d1 = solve_delta(id64, 64, 1.0).delta;
    c.require(std::abs(d1 - (std::sqrt(5.0) - 1.0) / 2.0) < 1e-10,
              "square case delta");
    const double d2 = solve_delta(id64, 32, 1.0).delta;
    c.require(std::abs(d2 - std::sqrt(2.0)) < 1e-10, "half-loaded delta");

    const CovarianceOperator cov =
        build_covariance(CovarianceSpec::exponential(0.1, 128));
    const double xi = rzf_optimal_regularization(cov, 32, 0.0, 10.0);
    c.require(std::abs(xi - 0.1) < 1e-8, "perfect-csi regularization");
    c.note << "delta roots and xi* limits reproduced";
}

// ---------------------------------------------------------------- 3 ---
void criterion_cascade_fd(Checker& c) {
    const CovarianceOperator cov =
        build_covariance(CovarianceSpec::exponential(0.1, 64));
    const int K = 16;
    const double tau = 0.4, h = 1e-3;
    DerivativeTables tb = derivative_cascade(cov, K, 3);
    assemble_matrices(tb, tau, 3);
    const oracle::Kernels kern(cov, K);

    double worst = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const double fd = oracle::fd_univariate(
            [&](double t) { return kern.delta(t); }, q, h);
        worst = std::max(worst, oracle::rel_err(tb.delta_q(q), fd));
    }
    for (int l = 0; l <= 3; ++l) {
        for (int m = 0; l + m <= 3; ++m) {
            const double fb = oracle::fd_mixed(
                [&](double t, double u) { return kern.beta(t, u); }, l, m, h);
            worst = std::max(worst, oracle::rel_err(tb.beta(l, m), fb));
            const double fc = oracle::fd_mixed(
                [&](double t, double u) { return kern.c(t, u); }, l, m, h);
            worst = std::max(worst, oracle::rel_err(tb.c(l, m), fc));
            const double fx = oracle::fd_mixed(
                [&](double t, double u) { return kern.Xbar(t, u, tau); }, l, m,
                h);
            worst = std::max(worst, oracle::rel_err(tb.Xbar(l, m), fx));
            const double fbb = oracle::fd_mixed(
                [&](double t, double u) { return kern.bbar(t, u, tau); }, l, m,
                h);
            worst = std::max(worst, oracle::rel_err(tb.bbar(l, m), fbb));
        }
    }
    c.require(worst < 1e-3, "worst relative error " + std::to_string(worst));
    c.note << "worst fd mismatch " << worst;
}

// ---------------------------------------------------------------- 4 ---
void criterion_route_equivalence(Checker& c) {
    const int M = 16, K = 4, J = 3;
    const double sigma2 = 1.0;
    const PowerAllocation alloc = uniform_power(1.0, K);
    TpeWeights w;
    w.w.resize(J);
    w.w << 1.0, -0.3, 0.05;

    double worst_sinr = 0.0, worst_hankel = 0.0, worst_rank = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        GaussianStream rng(5000 + inst);
        MatC h(M, K), e(M, K);
        rng.fill(h);
        rng.fill(e);
        const MatC hhat = std::sqrt(1 - 0.16) * h + 0.4 * e;

        const PrecodingMatrix g = tpe_matrix(hhat, w, alloc);
        const SinrReport direct = empirical_sinr_direct(h, g.G, sigma2);
        for (int k = 0; k < K; ++k) {
            const QuadraticForms qf = quadratic_forms(h, hhat, alloc, J, k);
            const double via = sinr_from_quadratics(w, qf, sigma2);
            worst_sinr = std::max(
                worst_sinr,
                std::abs(via - direct.per_user_sinr(k)) / direct.per_user_sinr(k));
            Eigen::JacobiSVD<MatC> svd(qf.A);
            worst_rank = std::max(
                worst_rank, svd.singularValues()(1) / svd.singularValues()(0));
            const double scale = qf.C.cwiseAbs().maxCoeff();
            for (int s = 0; s <= 2 * (J - 1); ++s) {
                double lo = 1e300, hi = -1e300;
                for (int l = 0; l < J; ++l) {
                    const int mm = s - l;
                    if (mm < 0 || mm >= J) continue;
                    lo = std::min(lo, qf.C(l, mm));
                    hi = std::max(hi, qf.C(l, mm));
                }
                worst_hankel = std::max(worst_hankel, (hi - lo) / scale);
            }
        }
    }
    c.require(worst_sinr < 1e-9,
              "sinr route mismatch " + std::to_string(worst_sinr));
    c.require(worst_rank < 1e-10, "signal form rank");
    c.require(worst_hankel < 1e-10, "power form not Hankel");
    c.note << "50 instances, worst sinr mismatch " << worst_sinr;
}

// ---------------------------------------------------------------- 5 ---
void criterion_de_vs_mc(Checker& c) {
    Scenario sc = exp_scenario(256, 64, 3, 0.1);
    sc.class_weights = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> grid = {0, 4, 8, 12, 16, 20};
    const std::vector<RateStats> stats =
        run_sweep(sc, grid, {Scheme::tpe}, 500, 1);

    double worst = 0.0;
    for (const RateStats& rs : stats) {
        for (int cls = 0; cls < 4; ++cls) {
            const double gap =
                std::abs(rs.class_mean_bits(cls) - rs.de_class_bits(cls)) /
                rs.de_class_bits(cls);
            worst = std::max(worst, gap);
        }
    }
    c.require(worst < 0.03, "worst class gap " + std::to_string(worst));

    // Reference per-class predictions at 20 dB, stored as log2 rates.
    // (A nats reading of these values would put the class-4 polynomial
    // precoder above the regularized-inverse limit, which is impossible.)
    static const double plotted_de[4] = {4.471, 5.439, 6.012, 6.422};
    for (int cls = 0; cls < 4; ++cls) {
        const double got = stats.back().de_class_bits(cls);
        c.require(std::abs(got - plotted_de[cls]) / plotted_de[cls] < 0.01,
                  "class " + std::to_string(cls + 1) +
                      " prediction at 20 dB is " + std::to_string(got));
    }
    c.note << "worst class gap " << worst << ", c4@20dB "
           << stats.back().de_class_bits(3) << " bits";
}

// ---------------------------------------------------------------- 6 ---
void criterion_rate_regression(Checker& c) {
    const int trials = 500;
    {
        const Scenario sc = exp_scenario(128, 32, 3, 0.1);
        const std::vector<RateStats> st =
            run_sweep(sc, {12.0}, {Scheme::rzf, Scheme::tpe}, trials, 1);
        const double rzf_want = 3.736 * kLog2E;
        const double tpe_want = 3.387 * kLog2E;
        c.require(std::abs(st[0].mean_rate_bits - rzf_want) / rzf_want < 0.05,
                  "rzf@12dB " + std::to_string(st[0].mean_rate_bits));
        c.require(std::abs(st[1].mean_rate_bits - tpe_want) / tpe_want < 0.05,
                  "tpe@12dB " + std::to_string(st[1].mean_rate_bits));
        c.note << "tau 0.1@12dB rzf " << st[0].mean_rate_bits << " tpe "
               << st[1].mean_rate_bits;
    }
    {
        const Scenario sc = exp_scenario(128, 32, 3, 0.7);
        const std::vector<double> grid = {0, 4, 8, 12, 16, 20};
        const std::vector<RateStats> st =
            run_sweep(sc, grid, {Scheme::rzf, Scheme::tpe}, trials, 1);
        for (size_t s = 0; s < grid.size(); ++s) {
            const double gap =
                std::abs(st[s].mean_rate_bits - st[grid.size() + s].mean_rate_bits) /
                st[s].mean_rate_bits;
            c.require(gap < 0.02, "tau 0.7 gap at " + std::to_string(grid[s]) +
                                      " dB is " + std::to_string(gap));
        }
    }
}

// ---------------------------------------------------------------- 7 ---
void criterion_rate_loss_flatness(Checker& c) {
    double lo = 1e300, hi = -1e300;
    for (int K : {8, 16, 32, 64}) {
        const Scenario sc = exp_scenario(4 * K, K, 4, 0.1);
        const std::vector<RateStats> st =
            run_sweep(sc, {10.0}, {Scheme::rzf, Scheme::tpe}, 500, 1);
        const double loss_nats =
            (st[0].mean_rate_bits - st[1].mean_rate_bits) / kLog2E;
        c.require(loss_nats > 0.03 && loss_nats < 0.09,
                  "loss at K=" + std::to_string(K) + " is " +
                      std::to_string(loss_nats) + " nats");
        lo = std::min(lo, loss_nats);
        hi = std::max(hi, loss_nats);
    }
    c.require(hi - lo < 0.02,
              "loss spread " + std::to_string(hi - lo) + " nats");
    c.note << "loss range [" << lo << ", " << hi << "] nats";
}

// ---------------------------------------------------------------- 8 ---
void criterion_optimality(Checker& c) {
    // closed form vs random search on the limit problem
    for (int Mdim : {64, 128}) {
        const int K = Mdim / 4;
        const CovarianceOperator cov =
            build_covariance(CovarianceSpec::exponential(0.1, Mdim));
        DerivativeTables tb = derivative_cascade(cov, K, 5);
        for (double tau : {0.1, 0.4}) {
            for (int J = 1; J <= 5; ++J) {
                AsymptoticMatrices mats = assemble_matrices(tb, tau, J);
                for (double snr : {0.0, 10.0, 20.0}) {
                    const double P = std::pow(10.0, snr / 10.0);
                    const OptimizationResult opt =
                        optimal_weights(mats, P, 1.0, uniform_power(P, K));
                    auto ratio = [&](const VecR& w) {
                        return w.dot(mats.A * w) /
                               (w.dot(mats.B * w) + 1.0 / P * w.dot(mats.C * w));
                    };
                    const double best = ratio(opt.weights.w);
                    GaussianStream rng(900 + J);
                    for (int i = 0; i < 1000; ++i) {
                        VecR w(J);
                        for (int j = 0; j < J; ++j)
                            w(j) = rng.complex_normal().real();
                        c.require(ratio(w) <= best * (1 + 1e-9),
                                  "random search beat the closed form");
                    }
                }
            }
        }
    }

    // per-realization tuning dominates the statistics-only coefficients
    const Scenario sc = exp_scenario(128, 32, 3, 0.4);
    const std::vector<double> grid = {0, 4, 8, 12, 16, 20};
    const std::vector<RateStats> st =
        run_sweep(sc, grid, {Scheme::tpe, Scheme::tpeopt}, 500, 1);
    for (size_t s = 0; s < grid.size(); ++s) {
        const double tpe = st[s].mean_rate_bits;
        const double opt = st[grid.size() + s].mean_rate_bits;
        c.require(opt >= tpe, "tpeopt below tpe at " +
                                  std::to_string(grid[s]) + " dB");
    }
    c.note << "36 limit configs + 6 Monte Carlo grid points";
}

// ---------------------------------------------------------------- 9 ---
void criterion_determinism(Checker& c) {
    const fs::path root = fs::temp_directory_path() / "tpemimo_acceptance";
    fs::remove_all(root);

    RunOptions opt;
    opt.preset = "fig7";
    opt.trials = 30;
    opt.seed = 7;

    opt.out_dir = (root / "a").string();
    const RunResult a = run(opt);
    opt.out_dir = (root / "b").string();
    const RunResult b = run(opt);
    opt.out_dir = (root / "c").string();
    opt.threads = 4;
    const RunResult cc = run(opt);

    const std::string ta = slurp(a.files[0]);
    c.require(!ta.empty(), "empty result table");
    c.require(ta == slurp(b.files[0]), "serial rerun differs");
    c.require(ta == slurp(cc.files[0]), "parallel rerun differs");

    RunOptions f2;
    f2.preset = "fig2";
    f2.out_dir = (root / "d").string();
    const RunResult d1 = run(f2);
    f2.out_dir = (root / "e").string();
    const RunResult d2 = run(f2);
    c.require(slurp(d1.files[0]) == slurp(d2.files[0]), "fig2 rerun differs");

    fs::remove_all(root);
    c.note << "byte-identical tables across reruns and thread counts";
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<void(Checker&)> body;
    };
    const std::vector<Entry> criteria = {
        {1, "complexity sweep exactness", criterion_complexity},
        {2, "fixed-point closed-form oracles", criterion_fixed_points},
        {3, "derivative cascade vs finite differences", criterion_cascade_fd},
        {4, "sinr route equivalence and form structure",
         criterion_route_equivalence},
        {5, "per-class prediction vs Monte Carlo", criterion_de_vs_mc},
        {6, "rate curve regression at M=128, K=32", criterion_rate_regression},
        {7, "rate-loss flatness across system size",
         criterion_rate_loss_flatness},
        {8, "coefficient optimality", criterion_optimality},
        {9, "byte-identical reruns", criterion_determinism},
    };

    int failures = 0;
    for (const Entry& e : criteria) {
        Checker c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            e.body(c);
        } catch (const std::exception& ex) {
            c.ok = false;
            c.why = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        if (c.ok) {
            std::cout << "[PASS] criterion " << e.id << ": " << e.name;
            if (!c.note.str().empty()) std::cout << " -- " << c.note.str();
        } else {
            ++failures;
            std::cout << "[FAIL] criterion " << e.id << ": " << e.name
                      << " -- " << c.why;
        }
        std::cout << " (" << std::fixed << secs << "s)\n";
        std::cout.unsetf(std::ios_base::floatfield);
        std::cout.flush();
    }
    if (failures == 0)
        std::cout << "all " << criteria.size() << " acceptance criteria passed\n";
    else
        std::cout << failures << " acceptance criteria failed\n";
    return failures;
}
