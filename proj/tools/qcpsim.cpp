// qcpsim: command-line front end for the control-processor simulator.
//
//   qcpsim assemble prog.qasm -o prog.bin
//   qcpsim run prog.qasm --config machine.json --trace issues.csv
//   qcpsim bench steane --cores 1,2,4,6 --seeds 1000 --bias 0.1
//   qcpsim compare prog.qasm --base scalar.json --variant wide.json
//
// Exit status: 0 success, 1 invalid input (parse, config, validation), 2 runtime fault.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qcp/bench.hpp"
#include "qcp/engine.hpp"
#include "qcp/isa.hpp"
#include "qcp/metrics.hpp"
#include "qcp/qpu.hpp"

namespace {

using nlohmann::json;

class InputError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << text;
}

qcp::MachineConfig config_or_default(const std::string& path)
{
    return path.empty() ? qcp::MachineConfig{} : qcp::load_config_file(path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct RunOptions {
    std::string program;
    std::string config;
    std::string trace;
    std::string steps;
    std::string output;
    std::optional<std::uint64_t> seed;
};

int cmd_run(const RunOptions& o)
{
    const auto p = qcp::load_program_file(o.program);
    auto cfg = config_or_default(o.config);
    if (o.seed) cfg.seed = *o.seed;
    const auto run = qcp::simulate(p, cfg);
    const auto report = qcp::make_report(run);
    if (!o.trace.empty()) {
        std::ostringstream csv;
        qcp::write_issue_csv(csv, run.trace.issues);
        write_text(o.trace, csv.str());
    }
    if (!o.steps.empty()) {
        std::ostringstream csv;
        qcp::write_steps_csv(csv, report);
        write_text(o.steps, csv.str());
    }
    write_text(o.output, dump(qcp::to_json(report)));
    return 0;
}

struct AssembleOptions {
    std::string input;
    std::string output;
    bool disassemble = false;
};

int cmd_assemble(const AssembleOptions& o)
{
    const auto p = qcp::load_program_file(o.input);
    if (o.disassemble) {
        write_text(o.output, qcp::print_program(p));
        return 0;
    }
    if (o.output.empty()) throw InputError("assemble needs -o <file> for binary output");
    const auto bytes = qcp::write_binary(p);
    write_text(o.output, std::string(bytes.begin(), bytes.end()));
    return 0;
}

struct BenchOptions {
    std::string name;
    qcp::BenchParams params;
    std::vector<std::uint32_t> cores{1};
    std::vector<std::uint32_t> widths{1};
    std::uint32_t seeds = 1;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
    bool ideal = false;
    bool emit = false;
    std::string config;
    std::string output;
};

int cmd_bench(const BenchOptions& o)
{
    const auto b = qcp::make_benchmark(o.name, o.params);
    if (o.emit) {
        write_text(o.output, qcp::print_program(b.program));
        return 0;
    }
    const auto base = b.configure(config_or_default(o.config));

    json cells = json::array();
    for (auto width : o.widths) {
        double single_core_mean = 0;
        for (auto cores : o.cores) {
            auto cfg = base;
            cfg.cores = cores;
            cfg.superscalar_width = width;
            cfg.seed = o.base_seed;
            cfg.record_cycles = true;
            auto stats = qcp::run_experiment(b.program, cfg, o.seeds, o.threads);
            json cell = {{"cores", cores}, {"width", width}, {"stats", qcp::to_json(stats)}};
            if (cores == o.cores.front()) single_core_mean = stats.mean_exec_ns;
            cell["speedup_vs_first"] = single_core_mean / stats.mean_exec_ns;
            if (o.ideal) {
                auto ideal_cfg = cfg;
                ideal_cfg.ideal_scheduling = true;
                ideal_cfg.record_cycles = false;
                const auto ideal = qcp::run_experiment(b.program, ideal_cfg, o.seeds, o.threads);
                cell["ideal_mean_exec_ns"] = ideal.mean_exec_ns;
                cell["ideal_speedup_vs_first"] = single_core_mean / ideal.mean_exec_ns;
            }
            cells.push_back(std::move(cell));
        }
    }
    json out = {{"benchmark", b.name},
                {"instructions", b.program.instructions.size()},
                {"quantum_instructions", b.program.quantum_count()},
                {"classical_instructions", b.program.classical_count()},
                {"blocks", b.program.blocks.size()},
                {"qubits", b.program.qubit_count},
                {"repetitions", o.seeds},
                {"cells", cells}};
    write_text(o.output, dump(out));
    return 0;
}

struct CompareOptions {
    std::string program;
    std::string base;
    std::string variant;
    std::string output;
};

int cmd_compare(const CompareOptions& o)
{
    const auto p = qcp::load_program_file(o.program);
    const auto base = qcp::make_report(qcp::simulate(p, qcp::load_config_file(o.base)));
    const auto variant = qcp::make_report(qcp::simulate(p, qcp::load_config_file(o.variant)));
    json out = {{"base", qcp::to_json(base)},
                {"variant", qcp::to_json(variant)},
                {"speedup", qcp::speedup(base, variant)},
                {"avg_tr_ratio", variant.avg_tr > 0 ? base.avg_tr / variant.avg_tr : 0.0}};
    write_text(o.output, dump(out));
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cycle-level simulator for a multicore superscalar quantum control processor"};
    app.require_subcommand(1);

    AssembleOptions asm_opts;
    auto* assemble = app.add_subcommand("assemble", "Assemble a text program into the binary format");
    assemble->add_option("input", asm_opts.input, "Program source (text or binary)")->required();
    assemble->add_option("-o,--output", asm_opts.output, "Output file ('-' for stdout with --disassemble)");
    assemble->add_flag("-d,--disassemble", asm_opts.disassemble, "Print the program as text instead");

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Simulate one program and print its run report as JSON");
    run->add_option("program", run_opts.program, "Program file (text or binary)")->required();
    run->add_option("-c,--config", run_opts.config, "Machine configuration JSON (defaults when omitted)");
    run->add_option("--trace", run_opts.trace, "Write the QPU issue log as CSV");
    run->add_option("--steps", run_opts.steps, "Write per-step cycle decomposition as CSV");
    run->add_option("--seed", run_opts.seed, "Override the configuration seed");
    run->add_option("-o,--output", run_opts.output, "Report file (stdout when omitted)");

    BenchOptions bench_opts;
    auto names = qcp::benchmark_names();
    std::string names_list;
    for (const auto& n : names) names_list += (names_list.empty() ? "" : ", ") + n;
    auto* bench = app.add_subcommand("bench", "Run a generated benchmark over core counts and widths");
    bench->add_option("name", bench_opts.name, "Benchmark: " + names_list)
        ->required()
        ->check(CLI::IsMember(names));
    bench->add_option("--qubits", bench_opts.params.qubits, "dense: qubit count")->capture_default_str();
    bench->add_option("--steps", bench_opts.params.steps, "dense: circuit steps")->capture_default_str();
    bench->add_option("--subcircuits", bench_opts.params.subcircuits, "rus: independent blocks")
        ->capture_default_str();
    bench->add_option("--length", bench_opts.params.length, "reset_rb: RB sequence length")->capture_default_str();
    bench->add_option("--bias", bench_opts.params.bias, "rus, steane: failure probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    bench->add_option("--cores", bench_opts.cores, "Core counts, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--width", bench_opts.widths, "Superscalar widths, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--seeds", bench_opts.seeds, "Repetitions per cell")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_opts.base_seed, "Seed of the first repetition")->capture_default_str();
    bench->add_option("-j,--threads", bench_opts.threads, "Worker threads per cell")->capture_default_str();
    bench->add_flag("--ideal", bench_opts.ideal, "Also run with zero-cost scheduling for the ideal speedup");
    bench->add_flag("--emit", bench_opts.emit, "Print the generated program text and exit");
    bench->add_option("-c,--config", bench_opts.config, "Base machine configuration JSON");
    bench->add_option("-o,--output", bench_opts.output, "Output file (stdout when omitted)");

    CompareOptions cmp_opts;
    auto* compare = app.add_subcommand("compare", "Run one program under two configurations");
    compare->add_option("program", cmp_opts.program, "Program file (text or binary)")->required();
    compare->add_option("--base", cmp_opts.base, "Baseline configuration JSON")->required();
    compare->add_option("--variant", cmp_opts.variant, "Variant configuration JSON")->required();
    compare->add_option("-o,--output", cmp_opts.output, "Output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assemble) return cmd_assemble(asm_opts);
        if (*run) return cmd_run(run_opts);
        if (*bench) return cmd_bench(bench_opts);
        if (*compare) return cmd_compare(cmp_opts);
    } catch (const qcp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qcp::SimulationFault& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return 2;
    } catch (const qcp::MetricsError& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // Parse, encode, config and file errors are all problems with the input.
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
