#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathhjb/model.hpp"
#include "pathhjb/verify.hpp"

namespace pathhjb {

// Parsed batch-run description. Seeds are mandatory: there is no
// wall-clock default anywhere.
struct RunConfig {
    std::string subcommand;
    std::string model_family = "demo";
    uint64_t model_seed = 0;
    uint64_t seed = 0;
    bool seed_set = false;
    long paths = 2000;
    int steps = 256;
    double t0 = 0.0;
    double t1 = -1.0;  // <0: the model horizon
    double alpha = 0.25;
    double holder_k = 0.0;
    int export_paths = 4;
    int depth = 4;
    long node_cap = 1L << 20;
    long budget = 1L << 20;
    int workers = 0;
    std::string out_dir = "out";
    std::vector<std::string> checks;
    // value lsmc knobs
    long lsmc_paths = 20000;
    int lsmc_steps = 8;
    std::vector<double> snapshots;
    int degree = 2;
    int policy_iters = 1;
    std::string noise = "gaussian";
    // verify output
    std::string report_path;
};

struct ParseOutcome {
    RunConfig config;
    std::vector<std::string> errors;  // all violations, not fail-fast
    bool ok() const { return errors.empty(); }
};

// Parses and validates a JSON config text, reporting every violation
// in one pass (line/column for syntax errors).
ParseOutcome parse_config(const std::string& text);
ParseOutcome parse_config_file(const std::string& path);

// 16-hex FNV-1a digest of the canonical model description.
std::string spec_digest(const std::string& family, uint64_t model_seed);

ModelSpec resolve_model(const RunConfig& config);

VerifyConfig make_verify_config(const RunConfig& config);

// Runs the configured subcommand (simulate, value-tree, value-lsmc,
// value-oracle, verify-run, fields-crosscheck), writes artifacts under
// out_dir, prints one summary line per unit of work. Exit codes:
// 0 ok, 1 validation, 2 resource, 3 numerical divergence, 4 check failure.
int dispatch(const RunConfig& config);

}  // namespace pathhjb
