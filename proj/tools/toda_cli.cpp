#include "toda/chaos.hpp"
#include "toda/correlator.hpp"
#include "toda/error.hpp"
#include "toda/fields.hpp"
#include "toda/rng.hpp"
#include "toda/rootdata.hpp"
#include "toda/surface.hpp"
#include "toda/walg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace toda;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum class Format { Json, Csv };

struct Common {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool serial = false;
    std::optional<std::int64_t> samples;
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << x;
    return os.str();
}

Format parse_format(const std::string& f) {
    if (f == "json") return Format::Json;
    if (f == "csv") return Format::Csv;
    throw ValidationError("unknown format '" + f + "' (json or csv)");
}

json load_config(const std::string& path) {
    if (path.empty()) throw ValidationError("--config is required for this command");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

ExecPolicy exec_of(const Common& c) {
    return c.serial ? ExecPolicy{Exec::Serial, 1} : ExecPolicy{Exec::Parallel, c.workers};
}

std::uint64_t require_seed(const Common& c, const std::string& command) {
    // Never auto-randomized.
    if (!c.seed) throw ValidationError(command + " is stochastic and needs an explicit --seed");
    return *c.seed;
}

std::int64_t sample_count(const Common& c, const json& cfg, std::int64_t fallback) {
    if (c.samples) return *c.samples;
    return cfg.value("samples", fallback);
}

// Everything that determines the numbers: command, config body, overrides, seed. Worker count excluded.
json provenance(const std::string& command, const json& cfg, const Common& c) {
    json key = {{"command", command}, {"config", cfg}};
    if (c.samples) key["samples"] = *c.samples;
    if (c.seed) key["seed"] = *c.seed;
    json p;
    p["command"] = command;
    p["config_hash"] = hex64(fnv1a(key.dump()));
    p["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    p["versions"] = {{"toda", kVersion}, {"rootdata", kVersion}, {"surface", kVersion}, {"fields", kVersion},
                     {"chaos", kVersion}, {"correlator", kVersion}, {"walg", kVersion}};
    return p;
}

void emit(const Common& c, const std::string& body) {
    if (c.out_path.empty() || c.out_path == "-") {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream out(c.out_path);
    if (!out) throw IoError("cannot write '" + c.out_path + "'");
    out << body;
    if (!out) throw IoError("write to '" + c.out_path + "' failed");
}

void emit_json(const Common& c, const json& j) { emit(c, j.dump(2) + "\n"); }

std::string csv_number(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

struct Setup {
    RootSystem rs;
    FoldingData fd;
    DiscreteSurface surface;
};

Setup setup_from(const json& cfg) {
    try {
        const RootSystem rs = build_root_system(parse_lie_type(cfg.at("algebra").get<std::string>()));
        const OuterAut tau = parse_tau(rs, cfg.value("tau", std::string("id")));
        FoldingData fd = fold(rs, tau);
        DiscreteSurface s = surface_from_json(cfg.at("surface"));
        return {rs, std::move(fd), std::move(s)};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

// Vector given in simple-root coordinates, returned in orthonormal coordinates.
Eigen::VectorXd root_vector(const RootSystem& rs, const json& j, const std::string& what) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != rs.r) throw ValidationError(what + " must have " + std::to_string(rs.r) + " entries");
    return rs.from_root_basis(Eigen::Map<const Eigen::VectorXd>(v.data(), rs.r).eval());
}

// ---- commands ----

int cmd_lie(const Common& c, const std::string& type) {
    const RootSystem rs = build_root_system(parse_lie_type(type));
    if (parse_format(c.format) == Format::Csv) {
        std::ostringstream os;
        os << "i,norm_sq,rho_coord,rho_vee_coord\n";
        for (int i = 0; i < rs.r; ++i)
            os << i + 1 << "," << to_string(rs.norms_sq[i]) << "," << to_string(rs.rho_e[i]) << ","
               << to_string(rs.rho_vee_e[i]) << "\n";
        emit(c, os.str());
        return 0;
    }
    json j = to_json(rs);
    j["provenance"] = provenance("lie", {{"type", type}}, c);
    emit_json(c, j);
    return 0;
}

int cmd_fold(const Common& c, const std::string& type, const std::string& tau_name) {
    const RootSystem rs = build_root_system(parse_lie_type(type));
    const FoldingData fd = fold(rs, parse_tau(rs, tau_name));
    if (parse_format(c.format) == Format::Csv) {
        emit(c, "type,tau,folded,d_N,kappa_sq\n" + type + "," + tau_name + "," + fd.folded_type.name() + "," +
                    std::to_string(fd.d_N) + "," + to_string(fd.kappa_sq) + "\n");
        return 0;
    }
    json j = to_json(rs, fd);
    j["provenance"] = provenance("fold", {{"type", type}, {"tau", tau_name}}, c);
    emit_json(c, j);
    return 0;
}

int cmd_seiberg(const Common& c) {
    const json cfg = load_config(c.config_path);
    const Setup su = setup_from(cfg);
    const FieldEnsemble ens(su.surface, su.rs, su.fd);
    const CorrelatorSpec spec = correlator_spec_from_json(cfg.at("correlator"), su.rs);
    const SeibergReport rep = seiberg_check(spec, ens);
    if (parse_format(c.format) == Format::Csv) {
        std::ostringstream os;
        os << "condition,insertion,index,margin\n";
        for (std::size_t i = 0; i < rep.condition_1.size(); ++i)
            os << "1,," << i + 1 << "," << csv_number(rep.condition_1[i]) << "\n";
        for (std::size_t k = 0; k < rep.condition_2_bulk.size(); ++k)
            for (std::size_t i = 0; i < rep.condition_2_bulk[k].size(); ++i)
                os << "2_bulk," << k << "," << i + 1 << "," << csv_number(rep.condition_2_bulk[k][i]) << "\n";
        for (std::size_t k = 0; k < rep.condition_2_boundary.size(); ++k)
            for (std::size_t i = 0; i < rep.condition_2_boundary[k].size(); ++i)
                os << "2_boundary," << k << "," << i + 1 << "," << csv_number(rep.condition_2_boundary[k][i]) << "\n";
        emit(c, os.str());
    } else {
        json j = to_json(rep);
        j["provenance"] = provenance("seiberg", cfg, c);
        emit_json(c, j);
    }
    return rep.verdict ? 0 : 2;
}

int cmd_sample(const Common& c, const std::string& dump_path) {
    const json cfg = load_config(c.config_path);
    const std::uint64_t seed = require_seed(c, "sample");
    const Setup su = setup_from(cfg);
    const FieldEnsemble ens(su.surface, su.rs, su.fd);
    const FieldKind kind = parse_field_kind(cfg.value("field", std::string("closed")));
    ens.require(kind);
    const std::int64_t count = sample_count(c, cfg, 1000);
    if (count < 2) throw ValidationError("sample needs at least 2 samples");
    if (!dump_path.empty()) write_sample_dump(dump_path, ens, kind, count, seed, exec_of(c));

    // Empirical variance of <u, X(v)> at probe vertices against the covariance law.
    std::vector<int> probes = cfg.value("probes", std::vector<int>{});
    if (probes.empty())
        for (int k = 0; k < 5; ++k) probes.push_back(static_cast<int>((static_cast<std::int64_t>(k) * ens.n()) / 5));
    for (int v : probes)
        if (v < 0 || v >= ens.n()) throw ValidationError("probe vertex out of range");
    const Eigen::VectorXd u = cfg.contains("direction") ? root_vector(su.rs, cfg["direction"], "direction")
                                                  : Eigen::VectorXd(su.rs.roots.row(0).transpose());
    const int r = su.rs.r;
    // Per-block partial sums, reduced in block order so the result does not depend on scheduling.
    const std::int64_t n_blocks = (count + kReplicaBlock - 1) / kReplicaBlock;
    std::vector<std::vector<double>> part(static_cast<std::size_t>(n_blocks), std::vector<double>(2 * probes.size(), 0.0));
    for_each_sample_block(ens, kind, seed, count, exec_of(c), 0,
                          [&](std::int64_t b, std::int64_t, const Eigen::MatrixXd& block) {
                              auto& acc = part[static_cast<std::size_t>(b)];
                              const Eigen::Index reps = block.cols() / r;
                              for (Eigen::Index j = 0; j < reps; ++j)
                                  for (std::size_t k = 0; k < probes.size(); ++k) {
                                      const double y = block.block(probes[k], j * r, 1, r).row(0).dot(u);
                                      acc[2 * k] += y;
                                      acc[2 * k + 1] += y * y;
                                  }
                          });
    std::vector<double> sum(probes.size(), 0.0), sum2(probes.size(), 0.0);
    for (const auto& acc : part)
        for (std::size_t k = 0; k < probes.size(); ++k) {
            sum[k] += acc[2 * k];
            sum2[k] += acc[2 * k + 1];
        }
    const Eigen::VectorXd exact = ens.law(kind).variance(u);
    const double n = static_cast<double>(count);
    json rows = json::array();
    std::ostringstream csv;
    csv << "vertex,mean,variance,exact_variance\n";
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const double mean = sum[k] / n;
        const double var = (sum2[k] - n * mean * mean) / (n - 1);
        rows.push_back({{"vertex", probes[k]}, {"mean", mean}, {"variance", var}, {"exact_variance", exact[probes[k]]}});
        csv << probes[k] << "," << csv_number(mean) << "," << csv_number(var) << "," << csv_number(exact[probes[k]]) << "\n";
    }
    if (parse_format(c.format) == Format::Csv) {
        emit(c, csv.str());
        return 0;
    }
    json j;
    j["field"] = to_string(kind);
    j["n_samples"] = count;
    j["probes"] = rows;
    if (!dump_path.empty()) j["dump"] = dump_path;
    j["provenance"] = provenance("sample", cfg, c);
    emit_json(c, j);
    return 0;
}

json to_json(const MomentReport& m) {
    json rows = json::array();
    for (const auto& r : m.rows)
        rows.push_back({{"p", r.p}, {"estimate", r.estimate}, {"stderr", r.stderr_}, {"drift", r.drift},
                        {"verdict", to_string(r.verdict)}});
    return {{"mesh_level", m.mesh_level},
            {"n_samples", m.n_samples},
            {"expected_mass", m.expected_mass},
            {"predicted_threshold", m.predicted_threshold},
            {"scaling_threshold", m.scaling_threshold},
            {"tail", {{"alpha", m.tail.alpha}, {"band", m.tail.band}, {"k", m.tail.k}}},
            {"rows", rows}};
}

int cmd_gmc(const Common& c) {
    const json cfg = load_config(c.config_path);
    const std::uint64_t seed = require_seed(c, "gmc");
    const json& ch = cfg.at("chaos");
    // One report per mesh level; "levels" lists surface descriptions from coarse to fine.
    std::vector<json> surfaces;
    if (cfg.contains("levels"))
        for (const auto& s : cfg["levels"]) surfaces.push_back(s);
    else
        surfaces.push_back(cfg.at("surface"));
    std::vector<MomentReport> reports;
    for (std::size_t level = 0; level < surfaces.size(); ++level) {
        json sub = cfg;
        sub["surface"] = surfaces[level];
        const Setup su = setup_from(sub);
        const FieldEnsemble ens(su.surface, su.rs, su.fd);
        const FieldKind kind = parse_field_kind(cfg.value("field", std::string("closed")));
        ChaosSpec spec;
        spec.direction = root_vector(su.rs, ch.at("direction"), "chaos direction");
        spec.region = parse_chaos_region(ch.value("region", std::string("bulk")));
        spec.mode = parse_chaos_mode(ch.value("mode", std::string("wick")));
        std::optional<ChaosShift> shift;
        if (ch.contains("shift"))
            shift = ChaosShift{ch["shift"].at("vertex").get<int>(), root_vector(su.rs, ch["shift"].at("alpha"), "shift alpha")};
        MomentScanOptions opt;
        if (ch.contains("p_grid")) opt.p_grid = ch["p_grid"].get<std::vector<double>>();
        opt.n_samples = sample_count(c, cfg, 10000);
        opt.seed = seed;
        opt.mesh_level = static_cast<int>(level);
        opt.exec = exec_of(c);
        reports.push_back(moment_scan(ens, kind, spec, {}, shift, opt));
    }
    if (parse_format(c.format) == Format::Csv) {
        std::ostringstream os;
        write_moment_csv(os, reports);
        emit(c, os.str());
        return 0;
    }
    json j;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    j["provenance"] = provenance("gmc", cfg, c);
    emit_json(c, j);
    return 0;
}

int cmd_estimate(const Common& c) {
    const json cfg = load_config(c.config_path);
    const std::uint64_t seed = require_seed(c, "estimate");
    std::vector<json> surfaces;
    if (cfg.contains("levels"))
        for (const auto& s : cfg["levels"]) surfaces.push_back(s);
    else
        surfaces.push_back(cfg.at("surface"));
    EstimateOptions opt;
    opt.n_samples = sample_count(c, cfg, 10000);
    opt.seed = seed;
    opt.exec = exec_of(c);
    opt.method = parse_zero_mode_method(cfg.value("method", std::string("factorized")));
    opt.zero_mode.rel_tol = cfg.value("quadrature_tolerance", 1e-8);
    const double budget = cfg.value("max_quadrature_error", 1e-6);

    std::vector<Estimate> est;
    std::vector<int> sizes;
    for (const auto& surf : surfaces) {
        json sub = cfg;
        sub["surface"] = surf;
        const Setup su = setup_from(sub);
        const FieldEnsemble ens(su.surface, su.rs, su.fd);
        const CorrelatorSpec spec = correlator_spec_from_json(cfg.at("correlator"), su.rs);
        opt.zero_mode.allow_divergent = spec.override_bounds;
        est.push_back(estimate_correlator(spec, ens, opt));
        sizes.push_back(su.surface.n_vertices);
    }
    bool over_budget = false;
    for (const auto& e : est) over_budget |= !(e.max_quad_error <= budget);

    if (parse_format(c.format) == Format::Csv) {
        std::ostringstream os;
        os << "level,n_vertices,value,value_imag,stderr,stderr_imag,n_samples,divergent\n";
        for (std::size_t l = 0; l < est.size(); ++l)
            os << l << "," << sizes[l] << "," << csv_number(est[l].value.real()) << ","
               << csv_number(est[l].value.imag()) << "," << csv_number(est[l].stderr_re) << ","
               << csv_number(est[l].stderr_im) << "," << est[l].n_samples << "," << (est[l].divergent ? 1 : 0) << "\n";
        emit(c, os.str());
    } else {
        json j;
        if (est.size() == 1) {
            j = to_json(est.front());
        } else {
            j["levels"] = json::array();
            for (std::size_t l = 0; l < est.size(); ++l) {
                json e = to_json(est[l]);
                e["level"] = l;
                e["n_vertices"] = sizes[l];
                j["levels"].push_back(e);
            }
            j["convention"] = j["levels"][0]["convention"];
            if (est.size() >= 3) {
                const std::size_t k = est.size();
                j["extrapolated"] = richardson(est[k - 3].value.real(), est[k - 2].value.real(), est[k - 1].value.real());
            }
        }
        j["quadrature_budget"] = {{"max_relative_error", budget}, {"exceeded", over_budget}};
        j["provenance"] = provenance("estimate", cfg, c);
        emit_json(c, j);
    }
    return over_budget ? 3 : 0;
}

json to_json(const DiffPoly& p) {
    json terms = json::array();
    for (const auto& [m, q] : p.terms()) {
        json mono = json::array();
        for (const auto& v : m) mono.push_back({{"order", v.order}, {"index", v.index + 1}});
        terms.push_back({{"monomial", mono}, {"coefficient", to_string(q)}});
    }
    return terms;
}

int cmd_walg(const Common& c, int n, const std::string& tau_name, const std::string& stress_type, bool text) {
    json j;
    std::ostringstream txt;
    if (!stress_type.empty()) {
        const RootSystem rs = build_root_system(parse_lie_type(stress_type));
        const Current st = stress_tensor(rs);
        print(txt, st);
        j["stress_tensor"] = {{"algebra", stress_type}, {"terms", to_json(st.poly)}};
        json inv = json::object();
        for (const auto& tau : outer_automorphisms(rs)) {
            std::string name;
            for (std::size_t i = 0; i < tau.perm.size(); ++i) name += (i ? "," : "") + std::to_string(tau.perm[i] + 1);
            inv[name] = apply_tau(st, tau).poly == st.poly;
        }
        j["tau_invariant"] = inv;
    } else {
        const RootSystem rs = build_root_system({Family::A, n - 1});
        const auto cur = miura_currents(n);
        const OuterAut tau = parse_tau(rs, n >= 3 ? tau_name : std::string("id"));
        const ParityResult res = parity_correct(cur, rs, tau);
        j["n"] = n;
        j["currents"] = json::array();
        for (std::size_t k = 0; k < cur.size(); ++k) {
            j["currents"].push_back({{"spin", cur[k].spin},
                                     {"miura", to_json(cur[k].poly)},
                                     {"corrected", to_json(res.currents[k].poly)},
                                     {"sign", res.signs[k]}});
            print(txt, res.currents[k]);
            txt << "  sign " << res.signs[k] << "\n";
        }
    }
    if (text) {
        emit(c, txt.str());
        return 0;
    }
    if (parse_format(c.format) == Format::Csv) throw ValidationError("walg output is json or text");
    j["provenance"] = provenance("walg", {{"n", n}, {"tau", tau_name}, {"stress", stress_type}}, c);
    emit_json(c, j);
    return 0;
}

int cmd_weylcheck(const Common& c) {
    const json cfg = load_config(c.config_path);
    const Setup su = setup_from(cfg);
    const double gamma = cfg.at("gamma").get<double>();
    const int n = su.surface.n_vertices;
    Eigen::VectorXd phi(n), u;
    if (cfg.contains("phi") && cfg.contains("u")) {
        const auto p = cfg["phi"].get<std::vector<double>>();
        if (static_cast<int>(p.size()) != n) throw ValidationError("phi must have one entry per vertex");
        phi = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
        u = root_vector(su.rs, cfg["u"], "u");
    } else {
        // Random conformal factor: stochastic, so the seed is mandatory.
        std::mt19937_64 rng = StreamFamily(require_seed(c, "weylcheck with random phi")).stream(0);
        std::normal_distribution<double> g;
        for (int v = 0; v < n; ++v) phi[v] = 0.3 * g(rng);
        u = Eigen::VectorXd(su.rs.r);
        for (int i = 0; i < su.rs.r; ++i) u[i] = g(rng);
    }
    const WeylShiftReport w = weyl_shift_check(su.surface, su.rs, gamma, phi, u, cfg.value("probes", std::vector<int>{}));
    const double tol = cfg.value("tolerance", 1e-10);
    const bool ok = w.variance_error <= tol && w.shift_error <= tol;
    if (parse_format(c.format) == Format::Csv) {
        std::ostringstream os;
        os << "vertex,shift,shift_formula\n";
        for (std::size_t k = 0; k < w.probes.size(); ++k)
            os << w.probes[k] << "," << csv_number(w.shift[k]) << "," << csv_number(w.shift_formula[k]) << "\n";
        emit(c, os.str());
    } else {
        json j = {{"variance_Y", w.variance_Y},       {"energy_formula", w.energy_formula},
                  {"variance_error", w.variance_error}, {"probes", w.probes},
                  {"shift", w.shift},                 {"shift_formula", w.shift_formula},
                  {"shift_error", w.shift_error},     {"tolerance", tol},
                  {"pass", ok}};
        j["provenance"] = provenance("weylcheck", cfg, c);
        emit_json(c, j);
    }
    return ok ? 0 : 3;
}

void add_common(CLI::App* sub, Common& c, bool config, bool stochastic) {
    if (config) sub->add_option("-c,--config", c.config_path, "JSON run configuration")->required();
    sub->add_option("-o,--out", c.out_path, "output file (default stdout)");
    sub->add_option("-f,--format", c.format, "json or csv");
    if (stochastic) {
        sub->add_option("-s,--seed", c.seed, "64-bit master seed (mandatory)");
        sub->add_option("-n,--samples", c.samples, "override the sample count");
        sub->add_option("-w,--workers", c.workers, "OpenMP workers (0: default)");
        sub->add_flag("--serial", c.serial, "serial reference path");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toda field theory laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common c;
    std::string type, tau = "swap", dump, stress;
    int n = 3;
    bool text = false;

    auto* lie = app.add_subcommand("lie", "root data of a simple Lie algebra");
    lie->add_option("-t,--type", type, "e.g. A2, E6")->required();
    add_common(lie, c, false, false);

    auto* fold_cmd = app.add_subcommand("fold", "fold by a diagram automorphism");
    fold_cmd->add_option("-t,--type", type)->required();
    fold_cmd->add_option("--tau", tau, "id, swap, triality or a 1-based permutation");
    add_common(fold_cmd, c, false, false);

    auto* seib = app.add_subcommand("seiberg", "Seiberg bounds of a correlator spec (exit 2 when violated)");
    add_common(seib, c, true, false);

    auto* samp = app.add_subcommand("sample", "sample a free field, report probe variances");
    samp->add_option("--dump", dump, "binary sample dump path");
    add_common(samp, c, true, true);

    auto* gmc = app.add_subcommand("gmc", "chaos moment scan");
    add_common(gmc, c, true, true);

    auto* est = app.add_subcommand("estimate", "Monte Carlo correlator estimate");
    add_common(est, c, true, true);

    auto* walg = app.add_subcommand("walg", "Miura currents and parity correction");
    walg->add_option("--n", n, "sl_n, 2 <= n <= 6");
    walg->add_option("--tau", tau, "automorphism for the parity correction");
    walg->add_option("--stress", stress, "print the stress tensor of this algebra instead");
    walg->add_flag("--text", text, "pretty-printed text instead of JSON");
    add_common(walg, c, false, false);

    auto* weyl = app.add_subcommand("weylcheck", "Weyl-shift identities on a surface");
    add_common(weyl, c, true, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*lie) return cmd_lie(c, type);
        if (*fold_cmd) return cmd_fold(c, type, tau);
        if (*seib) return cmd_seiberg(c);
        if (*samp) return cmd_sample(c, dump);
        if (*gmc) return cmd_gmc(c);
        if (*est) return cmd_estimate(c);
        if (*walg) return cmd_walg(c, n, tau, stress, text);
        if (*weyl) return cmd_weylcheck(c);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const StructuralError& e) {
        std::cerr << "structural failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: malformed config: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
