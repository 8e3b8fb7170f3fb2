#include <CLI11.hpp>
#include <iostream>

#include "pathhjb/config.hpp"

using namespace pathhjb;

namespace {

// Shared flags; command-line values override the config file.
struct CliArgs {
    std::string config_path;
    long paths = -1;
    int steps = -1;
    double t0 = -1.0;
    double t1 = -1.0;
    double alpha = -1.0;
    double holder_k = -1.0;
    int depth = -1;
    int workers = -1;
    long seed = -1;
    std::string features;
    std::string out;
};

int load_and_run(const CliArgs& args, const std::string& subcommand) {
    ParseOutcome parsed = args.config_path.empty()
                              ? parse_config("{\"seed\": 0}")
                              : parse_config_file(args.config_path);
    if (args.seed >= 0) {
        parsed.config.seed = static_cast<uint64_t>(args.seed);
        parsed.config.seed_set = true;
        // A seed given on the command line discharges the config requirement.
        std::erase_if(parsed.errors,
                      [](const std::string& e) { return e == "missing required key: seed"; });
    }
    if (args.config_path.empty() && args.seed < 0)
        parsed.errors.push_back("missing required key: seed (use --config or --seed)");
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        return 1;
    }
    RunConfig& c = parsed.config;
    c.subcommand = subcommand;
    if (args.paths >= 0) c.paths = args.paths;
    if (args.steps >= 0) c.steps = args.steps;
    if (args.t0 >= 0.0) c.t0 = args.t0;
    if (args.t1 >= 0.0) c.t1 = args.t1;
    if (args.alpha >= 0.0) c.alpha = args.alpha;
    if (args.holder_k >= 0.0) c.holder_k = args.holder_k;
    if (args.depth >= 0) c.depth = args.depth;
    if (args.workers >= 0) c.workers = args.workers;
    if (!args.out.empty()) c.report_path = args.out;
    if (!args.features.empty()) {
        c.snapshots.clear();
        std::stringstream ss(args.features);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.snapshots.push_back(std::stod(tok));
    }
    return dispatch(c);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathhjb: simulation, value estimation and verification for "
                 "path-dependent stochastic control"};
    app.require_subcommand(1);
    CliArgs args;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "JSON run configuration");
        cmd->add_option("--seed", args.seed, "seed override (mandatory here or in the config)");
        cmd->add_option("--workers", args.workers, "data-parallel width cap");
    };

    CLI::App* sim = app.add_subcommand("simulate", "roll controlled paths");
    add_common(sim);
    sim->add_option("--paths", args.paths, "number of Monte Carlo paths");
    sim->add_option("--steps", args.steps, "time steps");
    sim->add_option("--t0", args.t0, "start time");
    sim->add_option("--t1", args.t1, "end time; must match the model horizon");
    sim->add_option("--alpha", args.alpha, "Holder exponent for exit annotations");
    sim->add_option("--k", args.holder_k, "Holder radius for exit annotations");

    CLI::App* value = app.add_subcommand("value", "value-function estimation");
    value->require_subcommand(1);
    CLI::App* vtree = value->add_subcommand("tree", "exact backward induction");
    CLI::App* vlsmc = value->add_subcommand("lsmc", "regression Monte Carlo");
    CLI::App* voracle = value->add_subcommand("oracle", "exhaustive strategy enumeration");
    for (CLI::App* cmd : {vtree, vlsmc, voracle}) {
        add_common(cmd);
        cmd->add_option("--depth", args.depth, "tree depth");
        cmd->add_option("--paths", args.paths, "regression paths");
        cmd->add_option("--features", args.features, "comma-separated snapshot times");
    }

    CLI::App* verify = app.add_subcommand("verify", "verification suite");
    CLI::App* vrun = verify->add_subcommand("run", "run the selected checks");
    add_common(vrun);
    vrun->add_option("--out", args.out, "report path (default out_dir/report.json)");

    CLI::App* fields = app.add_subcommand("fields", "random-field utilities");
    CLI::App* fcross = fields->add_subcommand("crosscheck", "audit catalog derivative suites");
    add_common(fcross);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return load_and_run(args, "simulate");
    if (value->parsed()) {
        if (vtree->parsed()) return load_and_run(args, "value-tree");
        if (vlsmc->parsed()) return load_and_run(args, "value-lsmc");
        return load_and_run(args, "value-oracle");
    }
    if (verify->parsed()) return load_and_run(args, "verify-run");
    if (fields->parsed()) return load_and_run(args, "fields-crosscheck");
    return 1;
}
