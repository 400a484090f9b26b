#include "tpemimo/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tpemimo {

using nlohmann::json;

CovarianceSpec CovarianceSpec::exponential(double a, int M) {
    CovarianceSpec s;
    s.kind = Kind::exponential;
    s.a = a;
    s.M = M;
    return s;
}

CovarianceSpec CovarianceSpec::identity(int M) {
    CovarianceSpec s;
    s.kind = Kind::identity;
    s.M = M;
    return s;
}

CovarianceSpec CovarianceSpec::explicit_mat(MatC phi) {
    CovarianceSpec s;
    s.kind = Kind::explicit_matrix;
    s.M = static_cast<int>(phi.rows());
    s.matrix = std::move(phi);
    return s;
}

PowerAllocation uniform_power(double P, int K) {
    if (P <= 0.0) throw ConfigError("uniform_power: P must be positive");
    if (K < 1) throw ConfigError("uniform_power: K must be >= 1");
    PowerAllocation a;
    a.p = VecR::Constant(K, P / K);
    a.class_of_user.clear();
    a.num_classes = 1;
    return a;
}

PowerAllocation class_power(const std::vector<double>& class_weights, int K) {
    const int n = static_cast<int>(class_weights.size());
    if (n < 1) throw ConfigError("class_power: need at least one class");
    if (K < 1) throw ConfigError("class_power: K must be >= 1");
    if (K % n != 0)
        throw ConfigError("class_power: K not divisible by class count");
    for (double c : class_weights)
        if (c <= 0.0) throw ConfigError("class_power: nonpositive class weight");

    PowerAllocation a;
    a.p.resize(K);
    a.class_of_user.resize(K);
    a.num_classes = n;
    const int per_class = K / n;
    for (int k = 0; k < K; ++k) {
        const int c = k / per_class;
        a.p(k) = class_weights[c] / K;
        a.class_of_user[k] = c;
    }
    return a;
}

void validate_config(const SystemConfig& cfg, const PowerAllocation& alloc,
                     double scaling_guard) {
    if (cfg.M < 1) throw ConfigError("invalid antenna count M");
    if (cfg.K < 1) throw ConfigError("invalid user count K");
    if (cfg.P <= 0.0) throw ConfigError("nonpositive transmit power P");
    if (cfg.sigma2 <= 0.0) throw ConfigError("nonpositive noise variance");
    if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0))
        throw ConfigError("invalid CSI parameter tau (must lie in [0,1])");
    if (cfg.J < 1) throw ConfigError("polynomial order J must be >= 1");
    if (alloc.p.size() != cfg.K)
        throw ConfigError("power allocation length does not match K");
    for (int k = 0; k < cfg.K; ++k) {
        if (!(alloc.p(k) > 0.0))
            throw ConfigError("nonpositive power weight p_k");
        if (alloc.p(k) * cfg.K > scaling_guard)
            throw ConfigError("power weight violates O(1/K) scaling guard");
    }
}

LoadedConfig load_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    LoadedConfig lc;
    try {
        lc.cfg.M = j.at("M").get<int>();
        lc.cfg.K = j.at("K").get<int>();
        lc.cfg.sigma2 = j.value("sigma2", 1.0);
        if (j.contains("P"))
            lc.cfg.P = j.at("P").get<double>();
        else if (j.contains("snr_db"))
            lc.cfg.P = std::pow(10.0, j.at("snr_db").get<double>() / 10.0) *
                       lc.cfg.sigma2;
        else
            throw ConfigError("config needs either P or snr_db");
        lc.cfg.tau = j.value("tau", 0.0);
        lc.cfg.J = j.value("J", 1);

        const json cov = j.value("covariance", json{{"kind", "identity"}});
        const std::string kind = cov.value("kind", "identity");
        if (kind == "exponential")
            lc.cov = CovarianceSpec::exponential(cov.at("a").get<double>(),
                                                 lc.cfg.M);
        else if (kind == "identity")
            lc.cov = CovarianceSpec::identity(lc.cfg.M);
        else
            throw ConfigError("unknown covariance kind: " + kind);

        const json pw = j.value("power", json{{"kind", "uniform"}});
        const std::string pkind = pw.value("kind", "uniform");
        if (pkind == "uniform") {
            lc.alloc = uniform_power(lc.cfg.P, lc.cfg.K);
        } else if (pkind == "class") {
            lc.class_weights = pw.at("weights").get<std::vector<double>>();
            lc.alloc = class_power(lc.class_weights, lc.cfg.K);
        } else {
            throw ConfigError("unknown power kind: " + pkind);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    validate_config(lc.cfg, lc.alloc);
    return lc;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_json(ss.str());
}

std::string config_to_json(const LoadedConfig& lc) {
    json j;
    j["M"] = lc.cfg.M;
    j["K"] = lc.cfg.K;
    j["P"] = lc.cfg.P;
    j["sigma2"] = lc.cfg.sigma2;
    j["snr_db"] = lc.cfg.snr_db();
    j["tau"] = lc.cfg.tau;
    j["J"] = lc.cfg.J;
    switch (lc.cov.kind) {
        case CovarianceSpec::Kind::exponential:
            j["covariance"] = {{"kind", "exponential"}, {"a", lc.cov.a}};
            break;
        case CovarianceSpec::Kind::identity:
            j["covariance"] = {{"kind", "identity"}};
            break;
        case CovarianceSpec::Kind::explicit_matrix:
            j["covariance"] = {{"kind", "explicit"}, {"M", lc.cov.M}};
            break;
    }
    if (lc.class_weights.empty())
        j["power"] = {{"kind", "uniform"}};
    else
        j["power"] = {{"kind", "class"}, {"weights", lc.class_weights}};
    return j.dump(2);
}

}  // namespace tpemimo
