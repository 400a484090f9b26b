#include "tpemimo/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "tpemimo/complexity.hpp"
#include "tpemimo/config.hpp"

namespace tpemimo {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha1_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace {

constexpr double kLog2E = 1.4426950408889634;  // bits per nat

std::vector<double> snr_range(double lo, double step, double hi) {
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9; v += step) g.push_back(v);
    return g;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s;
}

struct SweepGroup {
    Scenario sc;
    std::vector<double> snr;
    std::vector<Scheme> schemes;
};

struct PresetPlan {
    std::string name;
    std::string title;
    enum class Kind { complexity, rates, rateloss } kind = Kind::rates;
    std::vector<SweepGroup> groups;
    int default_trials = 500;
    // complexity preset parameters
    std::int64_t cM = 0, cK = 0;
    double eta_dl = 0.5, mu = 2.0;
    std::vector<double> t_coherence;
};

Scenario base_scenario(int M, int K, int J, double tau) {
    Scenario sc;
    sc.M = M;
    sc.K = K;
    sc.J = J;
    sc.tau = tau;
    sc.sigma2 = 1.0;
    sc.cov_spec = CovarianceSpec::exponential(0.1, M);
    return sc;
}

PresetPlan resolve_preset(const RunOptions& opt) {
    const std::string& name = opt.preset;
    PresetPlan plan;
    plan.name = name;

    if (name == "fig2") {
        plan.kind = PresetPlan::Kind::complexity;
        plan.title = "per-coherence operation counts vs coherence period";
        plan.cM = 500;
        plan.cK = 100;
        plan.eta_dl = 0.5;
        plan.mu = 2.0;
        plan.t_coherence.push_back(402.0);
        for (double t = 410.0; t <= 910.0 + 1e-9; t += 20.0)
            plan.t_coherence.push_back(t);
        return plan;
    }
    if (name == "fig3") {
        plan.title = "rate vs SNR for three CSI qualities";
        for (double tau : {0.1, 0.4, 0.7}) {
            SweepGroup g;
            g.sc = base_scenario(128, 32, 3, tau);
            g.snr = snr_range(0, 4, 20);
            g.schemes = {Scheme::rzf, Scheme::tpe};
            plan.groups.push_back(std::move(g));
        }
        return plan;
    }
    if (name == "fig4") {
        plan.title = "rate vs SNR for three polynomial orders";
        bool first = true;
        for (int J : {2, 3, 4}) {
            SweepGroup g;
            g.sc = base_scenario(512, 128, J, 0.1);
            g.snr = snr_range(0, 4, 20);
            g.schemes = first ? std::vector<Scheme>{Scheme::rzf, Scheme::tpe}
                              : std::vector<Scheme>{Scheme::tpe};
            first = false;
            plan.groups.push_back(std::move(g));
        }
        return plan;
    }
    if (name == "fig5") {
        plan.kind = PresetPlan::Kind::rateloss;
        plan.title = "per-user rate loss of tpe vs rzf at fixed M/K = 4";
        for (int K = 8; K <= 64; K += 8) {
            for (int J : {3, 4, 5}) {
                SweepGroup g;
                g.sc = base_scenario(4 * K, K, J, 0.1);
                g.snr = (J == 4) ? std::vector<double>{10.0, 12.0}
                                 : std::vector<double>{10.0};
                g.schemes = {Scheme::rzf, Scheme::tpe};
                plan.groups.push_back(std::move(g));
            }
        }
        return plan;
    }
    if (name == "fig6") {
        plan.title = "rate vs SNR with per-realization coefficient tuning";
        SweepGroup g;
        g.sc = base_scenario(128, 32, 3, 0.4);
        g.snr = snr_range(0, 4, 20);
        g.schemes = {Scheme::rzf, Scheme::tpe, Scheme::tpeopt};
        plan.groups.push_back(std::move(g));
        return plan;
    }
    if (name == "fig7") {
        plan.title = "per-class rate with a four-class power allocation";
        SweepGroup g;
        g.sc = base_scenario(256, 64, 3, 0.1);
        g.sc.class_weights = {1.0, 2.0, 3.0, 4.0};
        g.snr = snr_range(0, 2, 20);
        g.schemes = {Scheme::tpe};
        plan.groups.push_back(std::move(g));
        return plan;
    }
    if (name == "custom") {
        if (opt.config_path.empty())
            throw ConfigError("custom preset requires --config");
        const LoadedConfig lc = load_config_file(opt.config_path);
        plan.title = "custom scenario from " + opt.config_path;
        SweepGroup g;
        g.sc.M = lc.cfg.M;
        g.sc.K = lc.cfg.K;
        g.sc.J = lc.cfg.J;
        g.sc.tau = lc.cfg.tau;
        g.sc.sigma2 = lc.cfg.sigma2;
        g.sc.cov_spec = lc.cov;
        g.sc.class_weights = lc.class_weights;
        g.snr = opt.snr_grid.empty() ? std::vector<double>{lc.cfg.snr_db()}
                                     : opt.snr_grid;
        if (opt.scheme_names.empty()) {
            g.schemes = {Scheme::rzf, Scheme::tpe};
        } else {
            for (const auto& n : opt.scheme_names)
                g.schemes.push_back(scheme_from_name(n));
        }
        plan.groups.push_back(std::move(g));
        return plan;
    }
    throw ConfigError("unknown preset: " + name);
}

std::string scheme_list(const std::vector<Scheme>& schemes) {
    std::string s;
    for (size_t i = 0; i < schemes.size(); ++i) {
        if (i) s += ", ";
        s += scheme_name(schemes[i]);
    }
    return s;
}

json group_to_json(const SweepGroup& g) {
    json j;
    j["M"] = g.sc.M;
    j["K"] = g.sc.K;
    j["J"] = g.sc.J;
    j["tau"] = g.sc.tau;
    j["sigma2"] = g.sc.sigma2;
    j["covariance"] =
        g.sc.cov_spec.kind == CovarianceSpec::Kind::exponential
            ? json{{"kind", "exponential"}, {"a", g.sc.cov_spec.a}}
            : json{{"kind", "identity"}};
    j["power"] = g.sc.class_weights.empty()
                     ? json{{"kind", "uniform"}}
                     : json{{"kind", "class"}, {"weights", g.sc.class_weights}};
    j["snr_db"] = g.snr;
    j["schemes"] = json::array();
    for (Scheme s : g.schemes) j["schemes"].push_back(scheme_name(s));
    return j;
}

struct Cell {
    std::string key;
    std::string value;
    bool numeric = true;
};

using Row = std::vector<Cell>;

std::string render_csv(const std::vector<Row>& rows) {
    if (rows.empty()) return "";
    std::string out;
    for (size_t i = 0; i < rows[0].size(); ++i) {
        if (i) out += ",";
        out += rows[0][i].key;
    }
    out += "\n";
    for (const Row& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) {
            if (i) out += ",";
            out += r[i].value;
        }
        out += "\n";
    }
    return out;
}

std::string render_json_rows(const std::vector<Row>& rows) {
    json arr = json::array();
    for (const Row& r : rows) {
        json obj;
        for (const Cell& c : r) {
            if (!c.numeric)
                obj[c.key] = c.value;
            else if (c.value.empty())
                obj[c.key] = nullptr;
            else
                obj[c.key] = json::parse(c.value);
        }
        arr.push_back(obj);
    }
    return arr.dump(1) + "\n";
}

void append_rate_rows(std::vector<Row>& rows, const std::string& preset,
                      const SweepGroup& g, const std::vector<RateStats>& stats) {
    auto make_row = [&](const RateStats& rs, const std::string& cls, double mc,
                        double se, double de, bool have_de) {
        Row row;
        row.push_back({"preset", preset, false});
        row.push_back({"scheme", scheme_name(rs.scheme), false});
        row.push_back({"M", std::to_string(g.sc.M)});
        row.push_back({"K", std::to_string(g.sc.K)});
        row.push_back(
            {"J", std::to_string(rs.scheme == Scheme::rzf ? 0 : rs.J)});
        row.push_back({"tau", format_double(rs.tau)});
        row.push_back({"snr_db", format_double(rs.snr_db)});
        row.push_back({"class", cls, false});
        row.push_back({"mean_rate_bits", format_double(mc)});
        row.push_back({"stderr_bits", format_double(se)});
        row.push_back({"de_rate_bits", have_de ? format_double(de) : ""});
        row.push_back({"gap_rel",
                       have_de && de != 0.0
                           ? format_double(std::abs(mc - de) / de)
                           : ""});
        row.push_back({"trials", std::to_string(rs.trials)});
        row.push_back({"seed", std::to_string(rs.seed)});
        rows.push_back(std::move(row));
    };

    for (const RateStats& rs : stats) {
        const bool have_de = rs.de_class_bits.size() > 0;
        make_row(rs, "all", rs.mean_rate_bits, rs.stderr_bits, rs.de_rate_bits,
                 have_de);
        if (rs.class_mean_bits.size() > 1) {
            for (int c = 0; c < rs.class_mean_bits.size(); ++c)
                make_row(rs, "c" + std::to_string(c + 1), rs.class_mean_bits(c),
                         rs.stderr_bits, have_de ? rs.de_class_bits(c) : 0.0,
                         have_de);
        }
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << content;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "custom"};
}

std::string describe(const std::string& preset, const std::string& config_path) {
    RunOptions opt;
    opt.preset = preset;
    opt.config_path = config_path;
    const PresetPlan plan = resolve_preset(opt);

    std::ostringstream out;
    out << "preset " << plan.name << "\n  " << plan.title << "\n";
    if (plan.kind == PresetPlan::Kind::complexity) {
        out << "  M = " << plan.cM << " antennas, K = " << plan.cK
            << " users\n";
        out << "  downlink fraction eta_DL = " << format_double(plan.eta_dl)
            << ", pilot uses per user mu = " << format_double(plan.mu) << "\n";
        out << "  coherence period grid: " << join_doubles(plan.t_coherence)
            << "\n";
        out << "  schemes: rzf, rzf2, tpe with J = 1..5\n";
        return out.str();
    }
    for (const SweepGroup& g : plan.groups) {
        out << "  - M = " << g.sc.M << " antennas, K = " << g.sc.K
            << " users\n";
        out << "    tpe order J = " << g.sc.J << "\n";
        out << "    tau = " << format_double(g.sc.tau) << "\n";
        out << "    covariance: exponential correlation, a = "
            << format_double(g.sc.cov_spec.a) << "\n";
        if (g.sc.class_weights.empty())
            out << "    power allocation: uniform\n";
        else
            out << "    power allocation: class weights "
                << join_doubles(g.sc.class_weights) << "\n";
        out << "    snr grid [dB]: " << join_doubles(g.snr) << "\n";
        out << "    schemes: " << scheme_list(g.schemes) << "\n";
    }
    out << "  default trials: " << plan.default_trials << "\n";
    return out.str();
}

RunResult run(const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (opt.format != "csv" && opt.format != "json")
        throw ConfigError("unknown output format: " + opt.format);

    PresetPlan plan = resolve_preset(opt);
    const int trials = opt.trials > 0 ? opt.trials : plan.default_trials;

    std::optional<TpeWeights> pinned;
    if (!opt.weights_path.empty()) {
        std::ifstream in(opt.weights_path);
        if (!in) throw ConfigError("cannot open weights file: " + opt.weights_path);
        std::stringstream ss;
        ss << in.rdbuf();
        pinned = weights_from_json(ss.str());
    }

    fs::create_directories(opt.out_dir);
    std::vector<Row> rows;

    if (plan.kind == PresetPlan::Kind::complexity) {
        auto add = [&](PrecScheme sch, std::int64_t J, double tc) {
            ComplexityInputs in;
            in.M = plan.cM;
            in.K = plan.cK;
            in.J = J;
            in.T_data = data_symbols(tc, plan.eta_dl, plan.mu, plan.cK);
            const ComplexityReport rep = ops_per_coherence(sch, in);
            const std::int64_t variant =
                sch == PrecScheme::rzf
                    ? rep.per_coherence_ops + rzf_sweep_offset(plan.cM, plan.cK)
                    : rep.per_coherence_ops;
            Row row;
            row.push_back({"preset", plan.name, false});
            row.push_back({"scheme", prec_scheme_name(sch), false});
            row.push_back({"J", std::to_string(sch == PrecScheme::tpe ? J : 0)});
            row.push_back({"M", std::to_string(plan.cM)});
            row.push_back({"K", std::to_string(plan.cK)});
            row.push_back({"T_coherence", format_double(tc)});
            row.push_back({"T_data", format_double(in.T_data)});
            row.push_back({"ops", std::to_string(rep.per_coherence_ops)});
            row.push_back({"ops_variant", std::to_string(variant)});
            row.push_back({"rounded", rep.rounded ? "1" : "0"});
            rows.push_back(std::move(row));
        };
        for (double tc : plan.t_coherence) add(PrecScheme::rzf, 1, tc);
        for (double tc : plan.t_coherence) add(PrecScheme::rzf2, 1, tc);
        for (int J = 1; J <= 5; ++J)
            for (double tc : plan.t_coherence) add(PrecScheme::tpe, J, tc);
    } else if (plan.kind == PresetPlan::Kind::rateloss) {
        for (SweepGroup& g : plan.groups) {
            g.sc.pinned_weights = pinned;
            const std::vector<RateStats> stats =
                run_sweep(g.sc, g.snr, g.schemes, trials, opt.seed, opt.threads);
            // schemes are {rzf, tpe}; pair them per SNR point
            const size_t n = g.snr.size();
            for (size_t s = 0; s < n; ++s) {
                const RateStats& rzf = stats[0 * n + s];
                const RateStats& tpe = stats[1 * n + s];
                const double loss = rzf.mean_rate_bits - tpe.mean_rate_bits;
                Row row;
                row.push_back({"preset", plan.name, false});
                row.push_back({"J", std::to_string(g.sc.J)});
                row.push_back({"K", std::to_string(g.sc.K)});
                row.push_back({"M", std::to_string(g.sc.M)});
                row.push_back({"tau", format_double(g.sc.tau)});
                row.push_back({"snr_db", format_double(g.snr[s])});
                row.push_back({"rate_rzf_bits",
                               format_double(rzf.mean_rate_bits)});
                row.push_back({"rate_tpe_bits",
                               format_double(tpe.mean_rate_bits)});
                row.push_back({"loss_bits", format_double(loss)});
                row.push_back({"loss_nats", format_double(loss / kLog2E)});
                row.push_back({"trials", std::to_string(trials)});
                row.push_back({"seed", std::to_string(opt.seed)});
                rows.push_back(std::move(row));
            }
        }
    } else {
        for (SweepGroup& g : plan.groups) {
            g.sc.pinned_weights = pinned;
            const std::vector<RateStats> stats =
                run_sweep(g.sc, g.snr, g.schemes, trials, opt.seed, opt.threads);
            append_rate_rows(rows, plan.name, g, stats);
        }
    }

    const std::string ext = opt.format == "csv" ? ".csv" : ".json";
    const std::string table_path =
        (fs::path(opt.out_dir) / (plan.name + "_results" + ext)).string();
    write_text(table_path,
               opt.format == "csv" ? render_csv(rows) : render_json_rows(rows));

    // Manifest: resolved configuration plus provenance.
    json cfg;
    cfg["preset"] = plan.name;
    cfg["trials"] = trials;
    cfg["seed"] = opt.seed;
    cfg["format"] = opt.format;
    if (plan.kind == PresetPlan::Kind::complexity) {
        cfg["complexity"] = {{"M", plan.cM},
                             {"K", plan.cK},
                             {"eta_DL", plan.eta_dl},
                             {"mu", plan.mu},
                             {"T_coherence", plan.t_coherence}};
    } else {
        cfg["groups"] = json::array();
        for (const SweepGroup& g : plan.groups)
            cfg["groups"].push_back(group_to_json(g));
    }
    if (pinned) cfg["pinned_weights"] = json::parse(weights_to_json(*pinned));

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config"] = cfg;
    manifest["config_hash"] = sha1_hex(cfg.dump());
    manifest["outputs"] = {table_path};
    const auto t1 = std::chrono::steady_clock::now();
    const double wall =
        std::chrono::duration<double>(t1 - t0).count();
    manifest["wall_time_s"] = wall;

    const std::string manifest_path =
        (fs::path(opt.out_dir) / (plan.name + "_manifest.json")).string();
    write_text(manifest_path, manifest.dump(2) + "\n");

    RunResult res;
    res.files = {table_path, manifest_path};
    res.wall_time_s = wall;
    return res;
}

}  // namespace tpemimo
