// Command-line front end for broadcast-process experiments on trees:
// exact density evolution of the root magnetization, Monte Carlo estimation,
// enumeration oracles, cutset/branching diagnostics, and the closed-form
// asymmetry bound.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "recon/analysis.hpp"
#include "recon/evolve.hpp"
#include "recon/io.hpp"
#include "recon/montecarlo.hpp"
#include "recon/parallel.hpp"

using nlohmann::json;
using namespace recon;

namespace {

struct CommonOpts {
    std::string output;  // empty = stdout
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-o,--output", opts.output, "Output file (default: stdout)");
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

void write_output(const CommonOpts& opts, const std::string& text) {
    if (opts.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.output);
    if (!out) throw std::runtime_error("cannot open output file '" + opts.output + "'");
    out << text;
}

std::string csv_config_comment(const json& config) {
    std::ostringstream out;
    for (const auto& [key, value] : config.items())
        out << "# " << key << " = "
            << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
    return out.str();
}

struct TreeInput {
    std::string tree_file;
    int arity = 2;
    double theta = 0.0;
    double delta = 0.0;
    int depth = 0;

    void add_options(CLI::App* cmd) {
        auto* tree = cmd->add_option("--tree", tree_file,
                                     "Tree file (line format: id parent theta delta)");
        auto* arity_opt =
            cmd->add_option("--arity", arity, "Children per vertex")->check(CLI::Range(1, 1024));
        auto* theta_opt = cmd->add_option("--theta", theta, "Second eigenvalue of the channel")
                              ->check(CLI::Range(-1.0, 1.0));
        auto* delta_opt = cmd->add_option("--delta", delta, "Channel asymmetry");
        auto* depth_opt = cmd->add_option("--depth", depth, "Tree depth")->check(CLI::Range(0, 64));
        arity_opt->capture_default_str();
        delta_opt->capture_default_str();
        depth_opt->capture_default_str();
        tree->excludes(arity_opt)->excludes(theta_opt)->excludes(delta_opt)->excludes(depth_opt);
        theta_opt->needs(depth_opt);
    }

    bool from_file() const { return !tree_file.empty(); }

    TreeSpec load() const {
        if (from_file()) {
            std::ifstream in(tree_file);
            if (!in) throw std::runtime_error("cannot open tree file '" + tree_file + "'");
            return parse_tree(in);
        }
        return build_regular_tree(arity, depth, channel_from_theta_delta(theta, delta));
    }

    ExactTreeSpec load_exact(const std::string& theta_text, const std::string& delta_text) const {
        if (from_file()) {
            std::ifstream in(tree_file);
            if (!in) throw std::runtime_error("cannot open tree file '" + tree_file + "'");
            return parse_tree_exact(in);
        }
        return build_regular_tree(arity, depth,
                                  channel_from_theta_delta(rational_from_decimal(theta_text),
                                                           rational_from_decimal(delta_text)));
    }

    json config_json(const char* subcommand) const {
        json config{{"subcommand", subcommand}};
        if (from_file()) {
            config["tree"] = tree_file;
        } else {
            config["arity"] = arity;
            config["theta"] = theta;
            config["delta"] = delta;
            config["depth"] = depth;
            config["channel"] = channel_json(channel_from_theta_delta(theta, delta));
        }
        return config;
    }
};

// Captures the literal --theta/--delta tokens so exact mode parses them as
// exact decimals rather than re-deriving rationals from doubles.
std::string raw_flag(const CLI::App* cmd, const char* name, const char* fallback) {
    const auto* opt = cmd->get_option(name);
    if (opt->count() == 0) return fallback;
    return opt->results().front();
}

int run_evolve(const TreeInput& input, const CommonOpts& common, const BinningPolicy& policy) {
    const Channel channel = channel_from_theta_delta(input.theta, input.delta);
    const EvolutionTrace trace = evolve(input.arity, channel, input.depth, policy);

    json config = input.config_json("evolve");
    config["bin_width"] = policy.bin_width;
    config["max_atoms"] = policy.max_atoms;
    config["binning"] = policy.enabled;

    std::vector<MomentTriple> triples(trace.levels.size());
    std::vector<double> tv(trace.levels.size());
    for (std::size_t n = 0; n < trace.levels.size(); ++n) {
        triples[n] = moments(trace.levels[n]);
        tv[n] = tv_distance(trace.levels[n]);
    }

    if (common.format == "csv") {
        std::ostringstream out;
        out << csv_config_comment(config);
        out << "depth,m,m_plus,m_minus,tv,atoms,recursion_bound,bound_ok\n";
        for (std::size_t n = 0; n < trace.levels.size(); ++n) {
            const double bound =
                n == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : symmetric_recursion_bound(triples[n - 1].m, input.arity, input.theta);
            const bool ok = n == 0 || triples[n].m <= bound + 1e-10;
            out << n << ',' << format_double(triples[n].m) << ','
                << format_double(triples[n].m_plus) << ',' << format_double(triples[n].m_minus)
                << ',' << format_double(tv[n]) << ',' << trace.stats[n].atoms << ','
                << format_double(bound) << ',' << (ok ? 1 : 0) << '\n';
        }
        write_output(common, out.str());
    } else {
        json levels = json::array();
        for (std::size_t n = 0; n < trace.levels.size(); ++n) {
            const double bound =
                n == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : symmetric_recursion_bound(triples[n - 1].m, input.arity, input.theta);
            levels.push_back({{"depth", n},
                              {"m", triples[n].m},
                              {"m_plus", triples[n].m_plus},
                              {"m_minus", triples[n].m_minus},
                              {"tv", tv[n]},
                              {"atoms", trace.stats[n].atoms},
                              {"recursion_bound", bound},
                              {"bound_ok", n == 0 || triples[n].m <= bound + 1e-10},
                              {"bin_threshold", trace.stats[n].bin_threshold},
                              {"m2_shift", trace.stats[n].m2_shift},
                              {"mass_error", trace.stats[n].mass_error}});
        }
        write_output(common, json{{"config", config}, {"levels", levels}}.dump(2) + "\n");
    }
    return 0;
}

int run_simulate(const TreeInput& input, const CommonOpts& common, std::int64_t samples,
                 std::uint64_t seed, int seed_count) {
    const TreeSpec tree = input.load();
    json config = input.config_json("simulate");
    config["samples"] = samples;
    config["seed"] = seed;
    config["seeds"] = seed_count;

    struct SeedResult {
        McMoments moments;
        McEstimate tv;
    };
    std::vector<SeedResult> results(seed_count);
    parallel_blocks(seed_count, [&](int k) {
        results[k].moments = estimate_moments(tree, samples, seed + k);
        results[k].tv = estimate_tv(tree, samples, seed + k);
    });

    if (common.format == "csv") {
        std::ostringstream out;
        out << csv_config_comment(config);
        out << "quantity,mean,std_error,n_samples,seed\n";
        for (const auto& r : results) {
            for (const McEstimate* est :
                 {&r.moments.m, &r.moments.m_plus, &r.moments.m_minus, &r.tv}) {
                out << quantity_name(est->quantity) << ',' << format_double(est->mean) << ','
                    << format_double(est->std_error) << ',' << est->n_samples << ',' << est->seed
                    << '\n';
            }
            out << "# mixture_residual = " << format_double(r.moments.mixture_residual) << "\n";
        }
        write_output(common, out.str());
    } else {
        json runs = json::array();
        for (const auto& r : results) {
            json entry = moments_json(r.moments);
            entry["tv"] = estimate_json(r.tv);
            runs.push_back(std::move(entry));
        }
        write_output(common, json{{"config", config}, {"runs", runs}}.dump(2) + "\n");
    }
    return 0;
}

int run_bruteforce(const TreeInput& input, const CommonOpts& common, bool exact, int max_leaves,
                   const std::string& theta_text, const std::string& delta_text) {
    json config = input.config_json("bruteforce");
    config["exact"] = exact;
    config["max_leaves"] = max_leaves;

    std::ostringstream csv;
    json body{{"config", config}};
    if (exact) {
        const ExactMagnetization dist =
            brute_force_distribution(input.load_exact(theta_text, delta_text), max_leaves);
        csv << csv_config_comment(config);
        write_distribution_csv(csv, dist);
        body["distribution"] = distribution_json(dist);
        body["tv"] = tv_distance(dist);
    } else {
        const MagnetizationDistribution dist =
            brute_force_distribution(input.load(), max_leaves);
        csv << csv_config_comment(config);
        write_distribution_csv(csv, dist);
        body["distribution"] = distribution_json(dist);
        body["tv"] = tv_distance(dist);
    }
    if (common.format == "csv")
        write_output(common, csv.str());
    else
        write_output(common, body.dump(2) + "\n");
    return 0;
}

int run_bounds(const CommonOpts& common, double theta0_min, double theta0_max, int steps,
               int arity) {
    json config{{"subcommand", "bounds"},
                {"theta0_min", theta0_min},
                {"theta0_max", theta0_max},
                {"steps", steps},
                {"arity", arity}};
    std::ostringstream csv;
    json rows = json::array();
    csv << csv_config_comment(config);
    csv << "theta0,beta,delta_bar,ks_product,classification\n";
    for (int k = 0; k <= steps; ++k) {
        const double theta0 =
            steps == 0 ? theta0_min
                       : theta0_min + (theta0_max - theta0_min) * k / static_cast<double>(steps);
        const BoundReport report = delta0_bound(theta0, arity);
        csv << format_double(report.theta0) << ',' << format_double(report.beta) << ','
            << format_double(report.delta_bar) << ',' << format_double(report.ks_product) << ','
            << classification_name(report.classification) << '\n';
        rows.push_back(bound_report_json(report));
    }
    if (common.format == "csv")
        write_output(common, csv.str());
    else
        write_output(common, json{{"config", config}, {"rows", rows}}.dump(2) + "\n");
    return 0;
}

int run_verify(const TreeInput& input, const CommonOpts& common, double tol, bool exact,
               const std::string& theta_text, const std::string& delta_text) {
    json config = input.config_json("verify");
    config["tol"] = tol;
    config["exact"] = exact;

    IdentityReport report;
    if (exact)
        report = verify_identities(input.load_exact(theta_text, delta_text), tol);
    else
        report = verify_identities(input.load(), tol);

    if (common.format == "csv") {
        std::ostringstream out;
        out << csv_config_comment(config);
        out << "identity,residual\n";
        for (const auto& item : report.items)
            out << item.name << ',' << format_double(item.residual) << '\n';
        out << "# max_residual = " << format_double(report.max_residual) << "\n";
        out << "# pass = " << (report.pass ? 1 : 0) << "\n";
        write_output(common, out.str());
    } else {
        json body{{"config", config}};
        body.update(identity_report_json(report));
        write_output(common, body.dump(2) + "\n");
    }
    return report.pass ? 0 : 2;
}

int run_cutset(const TreeInput& input, const CommonOpts& common, double lambda, bool estimate_br,
               double br_tol) {
    json config = input.config_json("cutset");
    config["lambda"] = lambda;

    const TreeSpec tree = input.load();
    const auto [weight, cut] = min_cutset_weight(tree, lambda);

    std::optional<BranchingEstimate> br;
    if (estimate_br) {
        if (input.from_file())
            throw std::invalid_argument(
                "--estimate-br: branching estimation applies to regular trees "
                "(--arity/--theta/--depth)");
        br = branching_number_estimate(input.arity, input.theta, std::max(input.depth, 2), br_tol);
        config["br_tol"] = br_tol;
    }

    if (common.format == "csv") {
        std::ostringstream out;
        out << csv_config_comment(config);
        out << "lambda,weight,cutset_size,antichain\n";
        out << format_double(lambda) << ',' << format_double(weight) << ',' << cut.vertices.size()
            << ',' << (cut.antichain ? 1 : 0) << '\n';
        if (br)
            out << "# branching_estimate = " << format_double(br->value)
                << " converged = " << (br->converged ? 1 : 0) << "\n";
        write_output(common, out.str());
    } else {
        json body{{"config", config}, {"cutset", cutset_json(cut, weight)}};
        if (br)
            body["branching_estimate"] = {{"value", br->value},
                                          {"converged", br->converged},
                                          {"iterations", br->iterations}};
        write_output(common, body.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Broadcast process on trees: reconstruction-threshold toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");

    // evolve
    auto* evolve_cmd =
        app.add_subcommand("evolve", "Exact distribution evolution of the root magnetization");
    TreeInput evolve_input;
    CommonOpts evolve_common;
    BinningPolicy policy;
    bool no_binning = false;
    evolve_cmd->add_option("--arity", evolve_input.arity, "Children per vertex")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    evolve_cmd->add_option("--theta", evolve_input.theta, "Second eigenvalue")
        ->required()
        ->check(CLI::Range(-1.0, 1.0));
    evolve_cmd->add_option("--delta", evolve_input.delta, "Asymmetry")->capture_default_str();
    evolve_cmd->add_option("--depth", evolve_input.depth, "Levels to evolve")
        ->required()
        ->check(CLI::Range(0, 256));
    evolve_cmd->add_option("--bin-width", policy.bin_width, "Atom consolidation window")
        ->capture_default_str();
    evolve_cmd->add_option("--max-atoms", policy.max_atoms, "Atom cap per level")
        ->capture_default_str();
    evolve_cmd->add_flag("--no-binning", no_binning, "Disable atom consolidation");
    add_common(evolve_cmd, evolve_common);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo moment and TV estimation");
    TreeInput sim_input;
    CommonOpts sim_common;
    std::int64_t sim_samples = 100000;
    std::uint64_t sim_seed = 0;
    int sim_seeds = 1;
    sim_input.add_options(sim_cmd);
    sim_cmd->add_option("--samples", sim_samples, "Samples per estimate")
        ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--seeds", sim_seeds, "Independent replicas seed..seed+n-1")
        ->check(CLI::Range(1, 10000))
        ->capture_default_str();
    add_common(sim_cmd, sim_common);

    // bruteforce
    auto* brute_cmd =
        app.add_subcommand("bruteforce", "Leaf-enumeration oracle for the magnetization law");
    TreeInput brute_input;
    CommonOpts brute_common;
    bool brute_exact = false;
    int brute_max_leaves = 20;
    brute_input.add_options(brute_cmd);
    brute_cmd->add_flag("--exact", brute_exact, "Rational arithmetic (decimal inputs)");
    brute_cmd->add_option("--max-leaves", brute_max_leaves, "Enumeration cap")
        ->check(CLI::Range(1, 30))
        ->capture_default_str();
    add_common(brute_cmd, brute_common);

    // bounds
    auto* bounds_cmd =
        app.add_subcommand("bounds", "Tabulate the delta_bar(theta0) bound and KS classification");
    CommonOpts bounds_common;
    double theta0_min = 0.0, theta0_max = 0.99;
    int bounds_steps = 99, bounds_arity = 2;
    bounds_cmd->add_option("--theta0-min", theta0_min, "Grid start")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    bounds_cmd->add_option("--theta0-max", theta0_max, "Grid end")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    bounds_cmd->add_option("--steps", bounds_steps, "Grid steps")
        ->check(CLI::Range(0, 100000))
        ->capture_default_str();
    bounds_cmd->add_option("--arity", bounds_arity, "Arity for the KS product")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    add_common(bounds_cmd, bounds_common);

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "Evaluate the magnetization identities on a brute-forceable tree");
    TreeInput verify_input;
    CommonOpts verify_common;
    double verify_tol = 1e-10;
    bool verify_exact = false;
    verify_input.add_options(verify_cmd);
    verify_cmd->add_option("--tol", verify_tol, "Residual tolerance")->capture_default_str();
    verify_cmd->add_flag("--exact", verify_exact, "Rational arithmetic (decimal inputs)");
    add_common(verify_cmd, verify_common);

    // cutset
    auto* cutset_cmd =
        app.add_subcommand("cutset", "Minimal cutset weight and branching-number estimate");
    TreeInput cutset_input;
    CommonOpts cutset_common;
    double lambda = 1.0, br_tol = 1e-6;
    bool estimate_br = false;
    cutset_input.add_options(cutset_cmd);
    cutset_cmd->add_option("--lambda", lambda, "Cutset weight scale")->capture_default_str();
    cutset_cmd->add_flag("--estimate-br", estimate_br, "Bisect for the branching number");
    cutset_cmd->add_option("--br-tol", br_tol, "Crossing threshold for the bisection")
        ->capture_default_str();
    add_common(cutset_cmd, cutset_common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve_cmd->parsed()) {
            policy.enabled = !no_binning;
            return run_evolve(evolve_input, evolve_common, policy);
        }
        if (sim_cmd->parsed())
            return run_simulate(sim_input, sim_common, sim_samples, sim_seed, sim_seeds);
        if (brute_cmd->parsed())
            return run_bruteforce(brute_input, brute_common, brute_exact, brute_max_leaves,
                                  raw_flag(brute_cmd, "--theta", "0"),
                                  raw_flag(brute_cmd, "--delta", "0"));
        if (bounds_cmd->parsed()) {
            if (theta0_max < theta0_min)
                throw std::invalid_argument("--theta0-max must be >= --theta0-min");
            return run_bounds(bounds_common, theta0_min, theta0_max, bounds_steps, bounds_arity);
        }
        if (verify_cmd->parsed())
            return run_verify(verify_input, verify_common, verify_tol, verify_exact,
                              raw_flag(verify_cmd, "--theta", "0"),
                              raw_flag(verify_cmd, "--delta", "0"));
        if (cutset_cmd->parsed())
            return run_cutset(cutset_input, cutset_common, lambda, estimate_br, br_tol);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
