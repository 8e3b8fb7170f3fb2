#include "pathhjb/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "pathhjb/fields.hpp"
#include "pathhjb/rng.hpp"
#include "pathhjb/value.hpp"

namespace pathhjb {

using ordered_json = nlohmann::ordered_json;

namespace {

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const std::vector<std::string> kTopKeys = {
    "seed",   "model",  "out_dir", "workers",      "paths",  "steps",       "t0",
    "alpha",  "holder_k", "export_paths", "depth", "node_cap", "budget",    "checks",
    "lsmc",   "report"};
const std::vector<std::string> kModelKeys = {"family", "seed"};
const std::vector<std::string> kLsmcKeys = {"paths", "steps", "snapshots", "degree",
                                            "policy_iters", "noise"};

bool known_key(const std::vector<std::string>& keys, const std::string& k) {
    return std::find(keys.begin(), keys.end(), k) != keys.end();
}

}  // namespace

ParseOutcome parse_config(const std::string& text) {
    ParseOutcome out;
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        out.errors.push_back("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what());
        return out;
    }
    if (!j.is_object()) {
        out.errors.push_back("config must be a JSON object");
        return out;
    }
    RunConfig& c = out.config;
    for (const auto& [key, val] : j.items()) {
        if (!known_key(kTopKeys, key)) {
            out.errors.push_back("unknown key: " + key);
            continue;
        }
        try {
            if (key == "seed") {
                c.seed = val.get<uint64_t>();
                c.seed_set = true;
            } else if (key == "model") {
                if (!val.is_object()) {
                    out.errors.push_back("model must be an object");
                    continue;
                }
                for (const auto& [mk, mv] : val.items()) {
                    if (!known_key(kModelKeys, mk)) {
                        out.errors.push_back("unknown key: model." + mk);
                    } else if (mk == "family") {
                        c.model_family = mv.get<std::string>();
                    } else {
                        c.model_seed = mv.get<uint64_t>();
                    }
                }
            } else if (key == "out_dir") {
                c.out_dir = val.get<std::string>();
            } else if (key == "workers") {
                c.workers = val.get<int>();
            } else if (key == "paths") {
                c.paths = val.get<long>();
            } else if (key == "steps") {
                c.steps = val.get<int>();
            } else if (key == "t0") {
                c.t0 = val.get<double>();
            } else if (key == "alpha") {
                c.alpha = val.get<double>();
            } else if (key == "holder_k") {
                c.holder_k = val.get<double>();
            } else if (key == "export_paths") {
                c.export_paths = val.get<int>();
            } else if (key == "depth") {
                c.depth = val.get<int>();
            } else if (key == "node_cap") {
                c.node_cap = val.get<long>();
            } else if (key == "budget") {
                c.budget = val.get<long>();
            } else if (key == "checks") {
                c.checks = val.get<std::vector<std::string>>();
            } else if (key == "report") {
                c.report_path = val.get<std::string>();
            } else if (key == "lsmc") {
                for (const auto& [lk, lv] : val.items()) {
                    if (!known_key(kLsmcKeys, lk)) {
                        out.errors.push_back("unknown key: lsmc." + lk);
                    } else if (lk == "paths") {
                        c.lsmc_paths = lv.get<long>();
                    } else if (lk == "steps") {
                        c.lsmc_steps = lv.get<int>();
                    } else if (lk == "snapshots") {
                        c.snapshots = lv.get<std::vector<double>>();
                    } else if (lk == "degree") {
                        c.degree = lv.get<int>();
                    } else if (lk == "policy_iters") {
                        c.policy_iters = lv.get<int>();
                    } else {
                        c.noise = lv.get<std::string>();
                    }
                }
            }
        } catch (const nlohmann::json::exception& e) {
            out.errors.push_back("bad value for key '" + key + "': " + e.what());
        }
    }
    if (!c.seed_set) out.errors.push_back("missing required key: seed");
    if (c.paths <= 0) out.errors.push_back("budget 'paths' must be positive");
    if (c.steps <= 0) out.errors.push_back("budget 'steps' must be positive");
    if (c.depth <= 0) out.errors.push_back("budget 'depth' must be positive");
    if (c.node_cap <= 0) out.errors.push_back("budget 'node_cap' must be positive");
    if (c.budget <= 0) out.errors.push_back("budget 'budget' must be positive");
    if (c.lsmc_paths <= 0) out.errors.push_back("budget 'lsmc.paths' must be positive");
    if (c.lsmc_steps <= 0) out.errors.push_back("budget 'lsmc.steps' must be positive");
    if (c.noise != "gaussian" && c.noise != "rademacher")
        out.errors.push_back("lsmc.noise must be 'gaussian' or 'rademacher'");
    try {
        builtin_model(c.model_family, c.model_seed);
    } catch (const ValidationError& e) {
        out.errors.push_back(e.what());
    }
    for (const auto& id : c.checks) {
        const auto& reg = registry_ids();
        if (std::find(reg.begin(), reg.end(), id) == reg.end())
            out.errors.push_back("unknown check id: " + id);
    }
    return out;
}

ParseOutcome parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        ParseOutcome out;
        out.errors.push_back("cannot open config file: " + path);
        return out;
    }
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string spec_digest(const std::string& family, uint64_t model_seed) {
    const std::string canon = family + "#" + std::to_string(model_seed);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ModelSpec resolve_model(const RunConfig& config) {
    ModelSpec spec = builtin_model(config.model_family, config.model_seed);
    spec.validate();
    return spec;
}

VerifyConfig make_verify_config(const RunConfig& config) {
    VerifyConfig vc;
    vc.spec = resolve_model(config);
    vc.digest = spec_digest(config.model_family, config.model_seed);
    vc.seed = config.seed;
    vc.workers = config.workers;
    vc.checks = config.checks;
    vc.budgets.paths = config.paths;
    vc.budgets.steps = config.steps;
    vc.budgets.lsmc_paths = config.lsmc_paths;
    vc.budgets.tree_depth = std::min(config.depth, 6);
    return vc;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    os << text;
}

void write_meta(const std::string& out_dir) {
    // The only timestamped artifact, kept apart so every other output is
    // byte-identical across reruns.
    ordered_json meta;
    meta["timestamp_unix"] = static_cast<long>(::time(nullptr));
    write_text(out_dir + "/meta.json", meta.dump(2) + "\n");
}

ordered_json report_json(const CheckReport& r) {
    ordered_json j;
    j["check"] = r.check;
    j["digest"] = r.digest;
    j["statistic"] = r.statistic;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    if (r.se) j["std_error"] = *r.se;
    j["seed"] = r.seed;
    j["note"] = r.note;
    return j;
}

int dispatch_simulate(const RunConfig& c) {
    const ModelSpec spec = resolve_model(c);
    if (c.t1 >= 0.0 && std::abs(c.t1 - spec.T) > 1e-12)
        throw ValidationError("t1 must equal the model horizon T = " + std::to_string(spec.T));
    const std::string digest = spec_digest(c.model_family, c.model_seed);
    TimeGrid g(0.0, spec.T, c.steps);
    NoiseBundle noise(g, spec.m, spec.m0, c.paths, c.seed,
                      c.noise == "rademacher" ? NoiseKind::Rademacher : NoiseKind::Gaussian);
    const DiscretePath xi =
        DiscretePath::constant(TimeGrid(0.0, g.dt, 1), Eigen::VectorXd::Zero(spec.d));
    SimOptions opts;
    opts.holder_alpha = c.alpha;
    opts.holder_k = c.holder_k;
    const SimResult res = simulate(spec, ControlPolicy::constant(0), c.t0, xi, noise, opts,
                                   c.workers);
    std::filesystem::create_directories(c.out_dir);
    ordered_json side;
    side["digest"] = digest;
    side["seed"] = c.seed;
    side["n_paths"] = c.paths;
    side["steps"] = c.steps;
    ordered_json ann = ordered_json::array();
    double mean_sup = 0.0;
    for (std::size_t p = 0; p < res.paths.size(); ++p) {
        const SimPath& sp = res.paths[p];
        mean_sup += sup_norm(sp.x.view()) / static_cast<double>(res.paths.size());
        if (static_cast<int>(p) < c.export_paths)
            save_path(sp.x, c.out_dir + "/path_" + std::to_string(p) + ".csv");
        ordered_json a;
        a["path"] = p;
        if (opts.holder_k > 0.0) a["holder_exit"] = sp.ann.holder_exit;
        ann.push_back(a);
    }
    side["annotations"] = ann;
    side["mean_sup_norm"] = mean_sup;
    write_text(c.out_dir + "/simulate.json", side.dump(2) + "\n");
    write_meta(c.out_dir);
    std::cout << "simulate: " << c.paths << " paths, mean sup-norm " << mean_sup << "\n";
    return 0;
}

int dispatch_value(const RunConfig& c) {
    const ModelSpec spec = resolve_model(c);
    const std::string digest = spec_digest(c.model_family, c.model_seed);
    const std::string mode = c.subcommand;  // value-tree / value-lsmc / value-oracle
    ordered_json j;
    j["digest"] = digest;
    j["seed"] = c.seed;
    std::string file;
    if (mode == "value-tree" || mode == "value-oracle") {
        ScenarioTree tree = make_pm_tree(spec, c.depth, Eigen::VectorXd::Zero(spec.d), c.node_cap);
        if (mode == "value-tree") {
            const TreeValueResult tv = tree_backward_induction(spec, tree);
            j["root_value"] = tv.root_value;
            ordered_json levels = ordered_json::array();
            for (const auto& lv : tv.values) levels.push_back(lv);
            j["values"] = levels;
            ordered_json ctrls = ordered_json::array();
            for (const auto& lv : tv.controls) ctrls.push_back(lv);
            j["controls"] = ctrls;
            file = "value_tree.json";
            std::cout << "value tree: depth " << c.depth << ", root " << tv.root_value << "\n";
        } else {
            const EnumerationResult er = enumerate_strategies(spec, tree, c.budget);
            j["root_value"] = er.value;
            j["n_strategies"] = er.n_strategies;
            j["strategy"] = er.strategy;
            file = "value_oracle.json";
            std::cout << "value oracle: " << er.n_strategies << " strategies, min "
                      << er.value << "\n";
        }
    } else {
        LsmcOptions opts;
        opts.n_paths = c.lsmc_paths;
        opts.n_steps = c.lsmc_steps;
        opts.features.snapshot_times =
            c.snapshots.empty() ? std::vector<double>{0.5 * spec.T} : c.snapshots;
        opts.features.degree = c.degree;
        opts.n_policy_iters = c.policy_iters;
        opts.noise_kind = c.noise == "rademacher" ? NoiseKind::Rademacher : NoiseKind::Gaussian;
        opts.seed = c.seed;
        opts.workers = c.workers;
        const LsmcSurface surf = lsmc_value(spec, Eigen::VectorXd::Zero(spec.d), opts);
        j["root_value"] = surf.root_value;
        ordered_json slices = ordered_json::array();
        for (const auto& s : surf.slices) {
            ordered_json sj;
            sj["w_nodes"] = s.w_feature_nodes;
            sj["x_nodes"] = s.x_feature_nodes;
            sj["basis_keep"] = s.basis_keep;
            sj["ridge_used"] = s.ridge_used;
            sj["rank"] = s.rank;
            ordered_json coefs = ordered_json::array();
            for (const auto& cvec : s.coef)
                coefs.push_back(std::vector<double>(cvec.data(), cvec.data() + cvec.size()));
            sj["coef"] = coefs;
            slices.push_back(sj);
        }
        j["slices"] = slices;
        file = "value_lsmc.json";
        std::cout << "value lsmc: " << c.lsmc_paths << " paths, root " << surf.root_value << "\n";
    }
    std::filesystem::create_directories(c.out_dir);
    write_text(c.out_dir + "/" + file, j.dump(2) + "\n");
    write_meta(c.out_dir);
    return 0;
}

int dispatch_verify(const RunConfig& c) {
    const VerifyConfig vc = make_verify_config(c);
    const std::vector<CheckReport> reports = run_suite(vc);
    ordered_json j;
    j["digest"] = vc.digest;
    j["seed"] = vc.seed;
    ordered_json arr = ordered_json::array();
    bool all_pass = true;
    std::string first_fail;
    for (const CheckReport& r : reports) {
        arr.push_back(report_json(r));
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << "  statistic=" << r.statistic
                  << " tolerance=" << r.tolerance << "\n";
        if (!r.pass && first_fail.empty()) first_fail = r.check;
        all_pass = all_pass && r.pass;
    }
    j["checks"] = arr;
    j["all_pass"] = all_pass;
    std::filesystem::create_directories(c.out_dir);
    const std::string path =
        c.report_path.empty() ? c.out_dir + "/report.json" : c.report_path;
    write_text(path, j.dump(2) + "\n");
    write_meta(c.out_dir);
    if (!all_pass) {
        std::cout << "FAILED: " << first_fail << "\n";
        return 4;
    }
    return 0;
}

int dispatch_crosscheck(const RunConfig& c) {
    const ModelSpec spec = resolve_model(c);
    const std::string digest = spec_digest(c.model_family, c.model_seed);
    ordered_json j;
    j["digest"] = digest;
    j["seed"] = c.seed;
    ordered_json arr = ordered_json::array();
    bool all_pass = true;
    for (const std::string name :
         {"sin-ito-integral", "endpoint-square", "running-integral", "upper-bound", "lower-bound",
          "snapshot-smooth"}) {
        const RandomField field = catalog_field(name, spec.d, spec.m, spec.L, spec.T);
        CrosscheckTolerances tol;
        const CrosscheckReport rep =
            crosscheck_suite(field, 12, tol, substream(c.seed, mix64(field.name.size())),
                             name == "snapshot-smooth" ? &spec : nullptr, c.workers);
        ordered_json fj;
        fj["field"] = rep.field;
        fj["pass"] = rep.pass;
        ordered_json entries = ordered_json::array();
        for (const auto& e : rep.entries) {
            if (!e.checked) continue;
            ordered_json ej;
            ej["derivative"] = e.derivative;
            ej["max_error"] = e.max_error;
            ej["tolerance"] = e.tolerance;
            ej["pass"] = e.pass;
            entries.push_back(ej);
        }
        fj["entries"] = entries;
        // Decomposition estimates at a pinned point, as plain records.
        if (field.d_t || field.d_w) {
            TimeGrid pg(0.0, spec.T, 64);
            NoiseBundle nx(pg, spec.d, 0, 1, substream(c.seed, 40));
            NoiseBundle nw(pg, spec.m, spec.m0, 1, substream(c.seed, 41));
            const DiscretePath x = nx.brownian_path(0).restricted(pg.time(32));
            RandomnessContext cx;
            const DiscretePath w = nw.brownian_path(0);
            cx.w = w.view();
            cx.m0 = spec.m0;
            const DecompositionEstimate est = estimate_decomposition(
                field, x, 4, 2000, substream(c.seed, 42), cx.truncated(pg.time(32)), c.workers);
            ordered_json rec;
            rec["estimate"] = est.d_t;
            rec["std_error"] = est.d_t_se;
            rec["n_paths"] = est.n_samples;
            rec["seed"] = est.seed;
            fj["d_t_record"] = rec;
            ordered_json recw;
            recw["estimate"] = std::vector<double>(est.d_w.data(), est.d_w.data() + est.d_w.size());
            recw["std_error"] =
                std::vector<double>(est.d_w_se.data(), est.d_w_se.data() + est.d_w_se.size());
            recw["n_paths"] = est.n_samples;
            recw["seed"] = est.seed;
            fj["d_w_record"] = recw;
        }
        arr.push_back(fj);
        std::cout << (rep.pass ? "PASS " : "FAIL ") << "crosscheck " << rep.field << "\n";
        all_pass = all_pass && rep.pass;
    }
    j["fields"] = arr;
    j["all_pass"] = all_pass;
    std::filesystem::create_directories(c.out_dir);
    write_text(c.out_dir + "/crosscheck.json", j.dump(2) + "\n");
    write_meta(c.out_dir);
    return all_pass ? 0 : 4;
}

}  // namespace

int dispatch(const RunConfig& config) {
    try {
        if (config.subcommand == "simulate") return dispatch_simulate(config);
        if (config.subcommand == "value-tree" || config.subcommand == "value-lsmc" ||
            config.subcommand == "value-oracle")
            return dispatch_value(config);
        if (config.subcommand == "verify-run") return dispatch_verify(config);
        if (config.subcommand == "fields-crosscheck") return dispatch_crosscheck(config);
        std::cerr << "unknown subcommand: " << config.subcommand << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << " (path " << e.path << ", step " << e.step
                  << ")\n";
        return 3;
    } catch (const EvaluationError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pathhjb
