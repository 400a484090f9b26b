#include "tpemimo/precoding.hpp"

#include <cmath>
#include <iostream>

#include <nlohmann/json.hpp>

namespace tpemimo {

using nlohmann::json;

std::string provenance_name(TpeWeights::Provenance p) {
    switch (p) {
        case TpeWeights::Provenance::asymptotic_optimal: return "asymptotic_optimal";
        case TpeWeights::Provenance::empirical_optimal: return "empirical_optimal";
        case TpeWeights::Provenance::truncation_derived: return "truncation_derived";
        case TpeWeights::Provenance::manual: return "manual";
    }
    return "manual";
}

TpeWeights::Provenance provenance_from_name(const std::string& name) {
    if (name == "asymptotic_optimal") return TpeWeights::Provenance::asymptotic_optimal;
    if (name == "empirical_optimal") return TpeWeights::Provenance::empirical_optimal;
    if (name == "truncation_derived") return TpeWeights::Provenance::truncation_derived;
    if (name == "manual") return TpeWeights::Provenance::manual;
    throw ConfigError("unknown weight provenance: " + name);
}

std::string weights_to_json(const TpeWeights& w) {
    json j;
    j["weights"] = std::vector<double>(w.w.data(), w.w.data() + w.w.size());
    j["provenance"] = provenance_name(w.provenance);
    return j.dump(2);
}

TpeWeights weights_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        TpeWeights w;
        const auto v = j.at("weights").get<std::vector<double>>();
        if (v.empty()) throw ConfigError("weights array is empty");
        w.w = Eigen::Map<const VecR>(v.data(), v.size());
        w.provenance = provenance_from_name(j.value("provenance", "manual"));
        return w;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("weights parse error: ") + e.what());
    }
}

static VecR sqrt_alloc(const PowerAllocation& alloc) {
    return alloc.p.cwiseSqrt();
}

PrecodingMatrix rzf_matrix(const MatC& Hhat, double xi,
                           const PowerAllocation& alloc, double P) {
    if (!(xi > 0.0)) throw ConfigError("rzf_matrix: xi must be positive");
    const int K = static_cast<int>(Hhat.cols());
    if (alloc.p.size() != K) throw ConfigError("rzf_matrix: allocation size");

    MatC gram = (Hhat.adjoint() * Hhat) / double(K);
    gram.diagonal().array() += xi;

    Eigen::LLT<MatC> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericError("rzf_matrix: factorization failed");
    const VecR d = llt.matrixL().toDenseMatrix().diagonal().real();
    if (d.minCoeff() < 1e-7 * d.maxCoeff())
        std::cerr << "rzf_matrix: regularized Gram matrix is badly conditioned\n";

    MatC rhs = MatC::Zero(K, K);
    rhs.diagonal() = sqrt_alloc(alloc).cast<cxd>();
    const MatC inner = llt.solve(rhs);

    PrecodingMatrix out;
    out.scheme = PrecodingMatrix::Scheme::rzf;
    out.G = (Hhat * inner) / std::sqrt(double(K));
    return normalize_power(std::move(out), P);
}

VecC rzf_apply(const MatC& Hhat, double xi, const PowerAllocation& alloc,
               double beta, const VecC& s) {
    const int K = static_cast<int>(Hhat.cols());
    if (s.size() != K) throw ConfigError("rzf_apply: symbol vector size");
    MatC gram = (Hhat.adjoint() * Hhat) / double(K);
    gram.diagonal().array() += xi;
    const VecC scaled = sqrt_alloc(alloc).cast<cxd>().cwiseProduct(s);
    const VecC y = Eigen::LLT<MatC>(gram).solve(scaled);
    return (beta / std::sqrt(double(K))) * (Hhat * y);
}

VecC tpe_apply(const MatC& Hhat, const TpeWeights& weights,
               const PowerAllocation& alloc, const VecC& s) {
    const int K = static_cast<int>(Hhat.cols());
    if (s.size() != K) throw ConfigError("tpe_apply: symbol vector size");
    const double inv_sqrt_k = 1.0 / std::sqrt(double(K));

    VecC x = inv_sqrt_k * (Hhat * sqrt_alloc(alloc).cast<cxd>().cwiseProduct(s));
    VecC acc = weights.w(0) * x;
    for (int l = 1; l < weights.order(); ++l) {
        x = inv_sqrt_k * (Hhat * (inv_sqrt_k * (Hhat.adjoint() * x)));
        acc += weights.w(l) * x;
    }
    return acc;
}

PrecodingMatrix tpe_matrix(const MatC& Hhat, const TpeWeights& weights,
                           const PowerAllocation& alloc) {
    const int K = static_cast<int>(Hhat.cols());
    if (alloc.p.size() != K) throw ConfigError("tpe_matrix: allocation size");
    const double inv_k = 1.0 / double(K);

    MatC x = (Hhat * sqrt_alloc(alloc).asDiagonal()) / std::sqrt(double(K));
    MatC g = weights.w(0) * x;
    for (int l = 1; l < weights.order(); ++l) {
        x = inv_k * (Hhat * (Hhat.adjoint() * x));
        g += weights.w(l) * x;
    }

    PrecodingMatrix out;
    out.scheme = PrecodingMatrix::Scheme::tpe;
    out.G = std::move(g);
    out.power_used = out.G.squaredNorm();
    return out;
}

TpeWeights truncation_coefficients(double xi, double kappa, double beta, int J) {
    if (!(kappa > 0.0))
        throw ConfigError("truncation_coefficients: kappa must be positive");
    if (J < 1) throw ConfigError("truncation_coefficients: J must be >= 1");

    TpeWeights w;
    w.provenance = TpeWeights::Provenance::truncation_derived;
    w.w.resize(J);
    for (int l = 0; l < J; ++l) {
        // sum_{n=l}^{J-1} binom(n,l) (1-kappa xi)^{n-l}
        double sum = 0.0;
        double binom = 1.0;  // binom(n,l) starting at n = l
        double pow_term = 1.0;
        for (int n = l; n < J; ++n) {
            sum += binom * pow_term;
            binom = binom * double(n + 1) / double(n + 1 - l);
            pow_term *= (1.0 - kappa * xi);
        }
        w.w(l) = beta * kappa * std::pow(-kappa, l) * sum;
    }
    return w;
}

PrecodingMatrix normalize_power(PrecodingMatrix G, double P) {
    if (!(P > 0.0)) throw ConfigError("normalize_power: P must be positive");
    const double used = G.G.squaredNorm();
    if (used == 0.0) throw NumericError("normalize_power: zero precoding matrix");
    G.G *= std::sqrt(P / used);
    G.power_used = P;
    return G;
}

}  // namespace tpemimo
