// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end for the trusted-path simulator.
//
//   tpsim run    --scenario <file> [--seed N] [--report text|json]
//                [--trace <path>] [--transport in-process|socket]
//   tpsim matrix --dir <dir>
//   tpsim batch  --scenario <file> --runs K --seed-base N [--threads T]
//
// Exit codes: 0 success / verdicts match, 1 verdict mismatch, 2 config error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tpsim/scenario.hpp"
#include "tpsim/simulation.hpp"

namespace {

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& report_format, const std::string& trace_path,
            const std::string& transport) {
    tpsim::ScenarioConfig config = tpsim::load_scenario_file(scenario_path);
    if (seed) {
        config.seed = *seed;
    }
    if (transport == "in-process") {
        config.transport = tpsim::TransportKind::InProcess;
    } else if (transport == "socket") {
        config.transport = tpsim::TransportKind::LoopbackSocket;
    } else if (!transport.empty()) {
        throw tpsim::Error(tpsim::Err::ConstraintError,
                           "unknown transport '" + transport + "'");
    }

    const tpsim::RunArtifacts artifacts = tpsim::run_scenario_with_trace(config);
    if (report_format == "json") {
        std::cout << artifacts.report.to_json();
    } else {
        std::cout << artifacts.report.to_text();
    }
    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write trace file: " << trace_path << "\n";
            return 2;
        }
        out << artifacts.trace.to_text();
    }
    return 0;
}

int cmd_matrix(const std::string& dir) {
    const tpsim::MatrixResult result = tpsim::run_matrix(dir);
    std::cout << result.to_text();
    return result.all_matched() ? 0 : 1;
}

int cmd_batch(const std::string& scenario_path, std::uint64_t runs, std::uint64_t seed_base,
              unsigned threads) {
    const tpsim::ScenarioConfig config = tpsim::load_scenario_file(scenario_path);
    const tpsim::BatchResult result = tpsim::run_batch(config, runs, seed_base, threads);
    std::cout << result.to_text();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic trusted-path attack simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string report_format = "text";
    std::string trace_path;
    std::string transport;

    CLI::App* run = app.add_subcommand("run", "run one scenario and print its report");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--report", report_format, "report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    run->add_option("--trace", trace_path, "write the event trace to this file");
    run->add_option("--transport", transport, "in-process or socket")
        ->check(CLI::IsMember({"in-process", "socket"}));

    std::string matrix_dir;
    CLI::App* matrix = app.add_subcommand("matrix", "run a directory of scenarios "
                                                    "and check expected verdicts");
    matrix->add_option("--dir", matrix_dir, "directory of *.scenario files")->required();

    std::uint64_t runs = 0;
    std::uint64_t seed_base = 0;
    unsigned threads = 0;
    CLI::App* batch = app.add_subcommand("batch", "statistical mode over many seeds");
    batch->add_option("--scenario", scenario_path, "scenario file")->required();
    batch->add_option("--runs", runs, "number of seeded runs")->required();
    batch->add_option("--seed-base", seed_base, "seed for run 0")->required();
    batch->add_option("--threads", threads, "worker threads (default: hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, seed, report_format, trace_path, transport);
        }
        if (matrix->parsed()) {
            return cmd_matrix(matrix_dir);
        }
        if (batch->parsed()) {
            return cmd_batch(scenario_path, runs, seed_base, threads);
        }
    } catch (const tpsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
