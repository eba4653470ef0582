#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rankq/commands.hpp"

namespace {

void add_q_options(CLI::App& app, rankq::RunConfig& c) {
    app.add_option("--epsilon", c.epsilon, "Indistinguishability margin, Q <= 1 - epsilon passes")
        ->capture_default_str();
    app.add_option("--quantize", c.quantization_step, "Theta grouping step (0 disables)")
        ->capture_default_str();
    app.add_option("--cap", c.enumeration_cap, "Largest block count evaluated exactly")
        ->capture_default_str();
    app.add_option("--bin-width", c.dp_bin_width, "Deficit bin width for the DP fallback")
        ->capture_default_str();
    app.add_flag("--clamp-certain", c.clamp_certain, "Treat theta = 1 as 1 - 1e-12");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rankq: compare a machine ranking sequence with a human annotation model"};
    app.require_subcommand(1);
    app.fallthrough();

    rankq::RunConfig config;
    app.add_flag("--json", config.json, "Machine-readable output");

    // estimate
    std::string annotations, targets;
    std::string policy = "confidence";
    std::string mode = "test";
    std::optional<int> max_undecided;
    auto* est = app.add_subcommand("estimate", "Estimate per-pair theta from annotations");
    est->add_option("annotations", annotations, "Annotations CSV")->required();
    est->add_option("-o,--output", targets, "Targets CSV to write")->required();
    est->add_option("--policy", policy, "confidence or ratio")
        ->check(CLI::IsMember({"confidence", "ratio"}))
        ->capture_default_str();
    est->add_option("--mode", mode, "Filter preset: train or test")
        ->check(CLI::IsMember({"train", "test"}))
        ->capture_default_str();
    est->add_option("--max-undecided", max_undecided,
                    "Drop a pair once it has this many undecided votes");
    est->add_flag("--include-unscored", config.include_unscored_votes,
                  "Count unscored votes in the confidence likelihood");
    add_q_options(*est, config);

    // evaluate
    std::string model, predictions;
    auto* eval = app.add_subcommand("evaluate", "Compute Q for a predictions file");
    eval->add_option("model", model, "Targets CSV")->required();
    eval->add_option("predictions", predictions, "Predictions CSV")->required();
    add_q_options(*eval, config);

    // report
    std::string manifest;
    std::optional<std::string> html;
    auto* rep = app.add_subcommand("report", "Tabulate Q over methods and attributes");
    rep->add_option("manifest", manifest, "CSV: method,attribute,model,predictions")->required();
    rep->add_option("--html", html, "Also write an HTML table here");
    add_q_options(*rep, config);

    // simulate
    std::string spec, outdir;
    std::optional<std::uint64_t> seed;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic population and rankings");
    sim->add_option("spec", spec, "Population spec (JSON)")->required();
    sim->add_option("-o,--output", outdir, "Output directory")->required();
    sim->add_option("--seed", seed, "Override the spec seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rankq::kExitInputError;
    }

    if (*est) {
        config.policy = policy == "ratio" ? rankq::EstimatorPolicy::RatioOnly
                                          : rankq::EstimatorPolicy::ConfidenceWhenUnanimous;
        config.filter = mode == "train" ? rankq::FilterPolicy::train() : rankq::FilterPolicy::test();
        if (max_undecided) config.filter.discard_at = *max_undecided;
        return rankq::cmd_estimate(annotations, targets, config, std::cout, std::cerr);
    }
    if (*eval) return rankq::cmd_evaluate(model, predictions, config, std::cout, std::cerr);
    if (*rep) return rankq::cmd_report(manifest, html, config, std::cout, std::cerr);
    config.seed = seed;
    return rankq::cmd_simulate(spec, outdir, config, std::cout, std::cerr);
}
