#include "qcp/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "qcp/qpu.hpp"

namespace qcp {

MachineConfig Benchmark::configure(MachineConfig base) const
{
    base.qpu.qubit_count = program.qubit_count;
    base.qpu.outcome_bias = bias;
    return base;
}

// ---------------------------------------------------------------------------
// ProgramBuilder

void ProgramBuilder::gate(std::uint32_t label, Gate g, std::initializer_list<int> qubits)
{
    emit(Instruction::quantum(label, g, qubits));
}

void ProgramBuilder::rotation(std::uint32_t label, Gate g, int qubit, double radians)
{
    emit(Instruction::rotation(label, g, qubit, radians));
}

void ProgramBuilder::measure(std::uint32_t label, int qubit, int result_reg, double bias_of_one)
{
    bias_.by_pc[pc()] = bias_of_one;
    emit(Instruction::measure(label, qubit, result_reg));
}

void ProgramBuilder::emit(const Instruction& i) { p_.instructions.push_back(i); }

std::size_t ProgramBuilder::branch(Cond c)
{
    emit(Instruction::br(c, 0));
    return p_.instructions.size() - 1;
}

std::size_t ProgramBuilder::jump()
{
    emit(Instruction::jmp(0));
    return p_.instructions.size() - 1;
}

void ProgramBuilder::bind(std::size_t at, std::uint32_t target) { p_.instructions.at(at).target = target; }

void ProgramBuilder::begin_block(std::string name)
{
    block_name_ = std::move(name);
    block_start_ = pc();
}

void ProgramBuilder::end_block_deps(std::vector<std::string> deps)
{
    p_.blocks.push_back({block_name_, block_start_, pc() - 1, std::move(deps), std::nullopt});
}

void ProgramBuilder::end_block_prio(std::uint32_t priority)
{
    p_.blocks.push_back({block_name_, block_start_, pc() - 1, {}, priority});
}

Benchmark ProgramBuilder::finish(std::string name, std::uint32_t qubits, double default_bias)
{
    p_.qubit_count = qubits;
    bias_.default_bias = default_bias;
    return {std::move(name), std::move(p_), std::move(bias_)};
}

// ---------------------------------------------------------------------------
// Generators

Benchmark gen_label_example()
{
    ProgramBuilder b;
    b.begin_block("main");
    b.gate(0, Gate::H, {0});
    b.gate(0, Gate::H, {1});
    b.gate(1, Gate::CNOT, {0, 1});
    b.end_block_deps({});
    return b.finish("label_example", 2);
}

Benchmark gen_dense(std::uint32_t qubits, std::uint32_t steps)
{
    if (qubits == 0 || qubits > kMaxQubits) throw std::invalid_argument("dense: qubit count out of range");
    ProgramBuilder b;
    b.begin_block("dense");
    // One gate time (2 cycles at 10 ns / 20 ns) between steps.
    for (std::uint32_t s = 0; s < steps; ++s)
        for (std::uint32_t q = 0; q < qubits; ++q) b.gate(q == 0 ? 2 : 0, Gate::H, {static_cast<int>(q)});
    b.emit(Instruction::end());
    b.end_block_deps({});
    return b.finish("dense", qubits);
}

Benchmark gen_feedforward()
{
    // Entangle q0 and q1 through q2, measure q2, then apply the Pauli
    // correction the outcome calls for.
    ProgramBuilder b;
    b.begin_block("feedforward");
    b.gate(0, Gate::H, {0});
    b.gate(0, Gate::H, {1});
    b.gate(0, Gate::H, {2});
    b.gate(2, Gate::CZ, {0, 2});
    b.gate(4, Gate::CZ, {1, 2});
    b.measure(4, 2, 0, 1.0);
    b.emit(Instruction::fmr(1, 0));
    b.emit(Instruction::ldi(2, 1));
    b.emit(Instruction::cmp(1, 2));
    const auto skip = b.branch(Cond::NE);
    b.gate(1, Gate::Z, {0});
    b.gate(0, Gate::X, {1});
    b.bind(skip, b.pc());
    b.emit(Instruction::end());
    b.end_block_deps({});
    return b.finish("feedforward", 3);
}

Benchmark gen_parallel_rus(std::uint32_t n, double failure_bias)
{
    if (n == 0 || 3 * n > kMaxQubits || n > kResultRegisters) throw std::invalid_argument("rus: bad subcircuit count");
    ProgramBuilder b;
    for (std::uint32_t k = 0; k < n; ++k) {
        const int a = 3 * static_cast<int>(k), d = a + 1, c = a + 2, r = static_cast<int>(k);
        b.begin_block("rus" + std::to_string(k));
        const auto start = b.pc();
        b.gate(0, Gate::H, {c});
        b.gate(2, Gate::CNOT, {a, c});
        b.rotation(4, Gate::RZ, c, std::numbers::pi / 4);
        b.gate(2, Gate::CNOT, {d, c});
        b.gate(4, Gate::H, {c});
        b.measure(2, c, r, failure_bias);
        b.emit(Instruction::fmr(1, r));
        b.emit(Instruction::ldi(2, 0));
        b.emit(Instruction::cmp(1, 2));
        const auto ok = b.branch(Cond::EQ);
        // Failure: undo the rotation on the data qubit, reset the ancilla, retry.
        b.rotation(1, Gate::RZ, a, -std::numbers::pi / 4);
        b.emit(Instruction::mrce(r, c, Gate::NOP, Gate::X));
        b.bind(b.jump(), start);
        b.bind(ok, b.pc());
        b.emit(Instruction::end());
        b.end_block_deps({});
    }
    return b.finish("parallel_rus", 3 * n);
}

namespace {

std::vector<Gate> rb_sequence(std::uint32_t len)
{
    static constexpr std::array<Gate, 4> kPaulis{Gate::X, Gate::Y, Gate::Z, Gate::H};
    SplitMix64 rng(0x5EEDull);
    std::vector<Gate> out;
    for (std::uint32_t k = 0; k < len; ++k) out.push_back(kPaulis[rng.next() % kPaulis.size()]);
    return out;
}

void emit_rb(ProgramBuilder& b, std::uint32_t len)
{
    bool first = true;
    for (auto g : rb_sequence(len)) {
        b.gate(first ? 0 : 2, g, {1});
        first = false;
    }
}

}  // namespace

Benchmark gen_active_reset_plus_rb(std::uint32_t len)
{
    ProgramBuilder b;
    b.begin_block("reset_rb");
    b.measure(0, 0, 0, 0.5);
    b.emit(Instruction::mrce(0, 0, Gate::NOP, Gate::X));
    emit_rb(b, len);
    b.emit(Instruction::end());
    b.end_block_deps({});
    return b.finish("active_reset_rb", 2);
}

Benchmark gen_active_reset_branch_reference(std::uint32_t len)
{
    ProgramBuilder b;
    b.begin_block("reset_rb");
    b.measure(0, 0, 0, 0.5);
    b.emit(Instruction::fmr(1, 0));
    b.emit(Instruction::ldi(2, 1));
    b.emit(Instruction::cmp(1, 2));
    const auto skip = b.branch(Cond::NE);
    b.gate(0, Gate::X, {0});
    b.bind(skip, b.pc());
    emit_rb(b, len);
    b.emit(Instruction::end());
    b.end_block_deps({});
    return b.finish("active_reset_rb_branch", 2);
}

// ---------------------------------------------------------------------------
// Steane-code syndrome extraction with Shor (cat-state) ancillas.

namespace {

constexpr int kData = 7;
constexpr int kGroups = 6;
constexpr int kCatBase = 7;
constexpr int kVerifyBase = kCatBase + 4 * kGroups;  // q31..q36
constexpr int kSteaneQubits = kVerifyBase + kGroups;  // 37

int cat(int g, int i) { return kCatBase + 4 * g + i; }

// Data-qubit order per stabilizer (supports {3,4,5,6}, {1,2,5,6}, {0,2,4,6}),
// permuted so column s never touches one data qubit twice.
constexpr std::array<std::array<int, 4>, 3> kCouplingOrder{{{3, 4, 5, 6}, {5, 6, 1, 2}, {0, 2, 6, 4}}};

int verify_reg(int g) { return g; }
int reset_reg(int g, int i) { return 6 + 4 * g + i; }
int extract_reg(int g, int i) { return 30 + 4 * g + i; }
int syndrome_word(int g) { return kSharedRegisterBase + g; }
constexpr int kVoteWord = kSharedRegisterBase + 6;

// Bit of the voted syndrome word for stabilizer g; X-type stabilizers fill
// bits 2..0 and Z-type bits 5..3, so each 3-bit field reads as (qubit + 1).
int vote_bit(int g) { return 8 - g - (g < 3 ? 6 : 0); }

void emit_init(ProgramBuilder& b)
{
    b.begin_block("init");
    b.gate(0, Gate::H, {0});
    b.gate(0, Gate::H, {1});
    b.gate(0, Gate::H, {3});
    const std::array<std::array<std::pair<int, int>, 3>, 3> slices{
        {{{{0, 4}, {1, 5}, {3, 6}}}, {{{0, 2}, {1, 6}, {3, 5}}}, {{{0, 6}, {1, 2}, {3, 4}}}}};
    std::uint32_t label = 2;
    for (const auto& slice : slices) {
        bool lead = true;
        for (auto [c, t] : slice) {
            b.gate(lead ? label : 0, Gate::CNOT, {c, t});
            lead = false;
        }
        label = 4;
    }
    b.end_block_prio(0);
}

void emit_prep(ProgramBuilder& b, int round, int g, std::uint32_t prio, double failure)
{
    const int v = kVerifyBase + g;
    b.begin_block("prep" + std::to_string(round) + "_" + std::to_string(g));
    const auto start = b.pc();
    b.gate(0, Gate::H, {cat(g, 0)});
    b.gate(2, Gate::CNOT, {cat(g, 0), cat(g, 1)});
    b.gate(4, Gate::CNOT, {cat(g, 1), cat(g, 2)});
    b.gate(0, Gate::CNOT, {cat(g, 0), cat(g, 3)});
    b.gate(4, Gate::CNOT, {cat(g, 0), v});
    b.gate(4, Gate::CNOT, {cat(g, 3), v});
    b.measure(4, v, verify_reg(g), failure);
    b.emit(Instruction::fmr(1, verify_reg(g)));
    b.emit(Instruction::ldi(2, 0));
    b.emit(Instruction::cmp(1, 2));
    const auto ok = b.branch(Cond::EQ);
    // Verification failed: measure the cat qubits, reset everything, retry.
    for (int i = 0; i < 4; ++i) b.measure(i == 0 ? 1 : 0, cat(g, i), reset_reg(g, i), 0.5);
    b.emit(Instruction::mrce(verify_reg(g), v, Gate::NOP, Gate::X));
    for (int i = 0; i < 4; ++i) b.emit(Instruction::mrce(reset_reg(g, i), cat(g, i), Gate::NOP, Gate::X));
    b.bind(b.jump(), start);
    b.bind(ok, b.pc());
    b.emit(Instruction::end());
    b.end_block_prio(prio);
}

void emit_coupling(ProgramBuilder& b, int round, bool z_type, std::uint32_t prio)
{
    b.begin_block(std::string(z_type ? "zcpl" : "xcpl") + std::to_string(round));
    for (int s = 0; s < 4; ++s)
        for (int k = 0; k < 3; ++k) {
            const int g = z_type ? 3 + k : k;
            b.gate(k == 0 ? (s == 0 ? 0 : 4) : 0, z_type ? Gate::CZ : Gate::CNOT, {cat(g, s), kCouplingOrder[k][s]});
        }
    b.end_block_prio(prio);
}

void emit_extract(ProgramBuilder& b, int round, int g, std::uint32_t prio, double bias)
{
    b.begin_block("extract" + std::to_string(round) + "_" + std::to_string(g));
    for (int i = 0; i < 4; ++i) b.measure(0, cat(g, i), extract_reg(g, i), bias);
    for (int i = 0; i < 4; ++i) b.emit(Instruction::fmr(1 + i, extract_reg(g, i)));
    // Parity of the four outcomes, folded into bit `round` of the shared syndrome word.
    b.emit(Instruction::alu(ClassicalOp::ADD, 1, 1, 2));
    b.emit(Instruction::alu(ClassicalOp::ADD, 1, 1, 3));
    b.emit(Instruction::alu(ClassicalOp::ADD, 1, 1, 4));
    b.emit(Instruction::ldi(5, 1));
    b.emit(Instruction::alu(ClassicalOp::AND, 1, 1, 5));
    b.emit(Instruction::alu(ClassicalOp::SUB, 6, 0, 1));
    b.emit(Instruction::ldi(7, 1 << round));
    b.emit(Instruction::alu(ClassicalOp::AND, 6, 6, 7));
    b.emit(Instruction::alu(ClassicalOp::ADD, syndrome_word(g), syndrome_word(g), 6));
    for (int i = 0; i < 4; ++i) b.emit(Instruction::mrce(extract_reg(g, i), cat(g, i), Gate::NOP, Gate::X));
    b.emit(Instruction::end());
    b.end_block_prio(prio);
}

void emit_vote(ProgramBuilder& b, int g, int rounds, std::uint32_t prio)
{
    b.begin_block("vote" + std::to_string(g));
    b.emit(Instruction::ldi(1, 0));
    b.emit(Instruction::ldi(9, 1));
    for (int r = 0; r < rounds; ++r) {
        b.emit(Instruction::ldi(2, 1 << r));
        b.emit(Instruction::alu(ClassicalOp::AND, 3, syndrome_word(g), 2));
        b.emit(Instruction::cmp(3, 0));
        const auto skip = b.branch(Cond::EQ);
        b.emit(Instruction::alu(ClassicalOp::ADD, 1, 1, 9));
        b.bind(skip, b.pc());
    }
    b.emit(Instruction::ldi(4, rounds / 2 + 1));
    b.emit(Instruction::cmp(1, 4));
    const auto done = b.branch(Cond::LT);
    b.emit(Instruction::ldi(5, 1 << vote_bit(g)));
    b.emit(Instruction::alu(ClassicalOp::OR, kVoteWord, kVoteWord, 5));
    b.bind(done, b.pc());
    b.emit(Instruction::end());
    b.end_block_prio(prio);
}

void emit_correction(ProgramBuilder& b, std::uint32_t prio)
{
    b.begin_block("correct");
    std::vector<std::size_t> to_next;
    for (int part = 0; part < 2; ++part) {
        // part 0: X-type syndrome locates a Z error; part 1: Z-type locates an X error.
        const int shift = part == 0 ? 1 : 8;
        b.emit(Instruction::ldi(9, 7 * shift));
        b.emit(Instruction::alu(ClassicalOp::AND, 1, kVoteWord, 9));
        std::vector<std::size_t> cases;
        for (int k = 1; k <= kData; ++k) {
            b.emit(Instruction::ldi(2, k * shift));
            b.emit(Instruction::cmp(1, 2));
            cases.push_back(b.branch(Cond::EQ));
        }
        std::vector<std::size_t> exits{b.jump()};
        for (int k = 1; k <= kData; ++k) {
            b.bind(cases[k - 1], b.pc());
            b.gate(1, part == 0 ? Gate::Z : Gate::X, {k - 1});
            exits.push_back(b.jump());
        }
        for (auto e : exits) b.bind(e, b.pc());
    }
    b.emit(Instruction::end());
    b.end_block_prio(prio);
}

}  // namespace

Benchmark gen_steane_syndrome(const SteaneOptions& opts)
{
    if (opts.rounds == 0 || opts.rounds > 8) throw std::invalid_argument("steane: rounds must be 1..8");
    const int rounds = static_cast<int>(opts.rounds);
    ProgramBuilder b;
    emit_init(b);
    for (int r = 0; r < rounds; ++r) {
        const auto base = static_cast<std::uint32_t>(1 + 4 * r);
        for (int g = 0; g < kGroups; ++g) emit_prep(b, r, g, base, opts.verification_failure);
        emit_coupling(b, r, false, base + 1);
        emit_coupling(b, r, true, base + 2);
        for (int g = 0; g < kGroups; ++g) emit_extract(b, r, g, base + 3, opts.syndrome_bias);
    }
    const auto vote_prio = static_cast<std::uint32_t>(4 * rounds + 1);
    for (int g = 0; g < kGroups; ++g) emit_vote(b, g, rounds, vote_prio);
    emit_correction(b, vote_prio + 1);
    return b.finish("steane", kSteaneQubits);
}

// ---------------------------------------------------------------------------

std::vector<std::string> benchmark_names()
{
    return {"dense", "feedforward", "rus", "reset_rb", "reset_rb_branch", "steane", "label_example"};
}

Benchmark make_benchmark(const std::string& name, const BenchParams& params)
{
    if (name == "dense") return gen_dense(params.qubits, params.steps);
    if (name == "feedforward") return gen_feedforward();
    if (name == "rus") return gen_parallel_rus(params.subcircuits, params.bias);
    if (name == "reset_rb") return gen_active_reset_plus_rb(params.length);
    if (name == "reset_rb_branch") return gen_active_reset_branch_reference(params.length);
    if (name == "steane") return gen_steane_syndrome({3, params.bias, 0.5});
    if (name == "label_example") return gen_label_example();
    throw std::invalid_argument("unknown benchmark '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment runner

std::uint64_t repetition_seed(std::uint64_t base, std::uint32_t rep) { return base + kSeedStride * rep; }

namespace {

double percentile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) return 0;
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) ;
    return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
}

struct RepOutcome {
    double exec_ns = 0;
    double avg_tr = 0;
    std::size_t collisions = 0;
    std::size_t violations = 0;
};

}  // namespace

ExperimentStats run_experiment(const Program& p, const MachineConfig& cfg, std::uint32_t repetitions,
                               unsigned threads)
{
    if (repetitions == 0) throw std::invalid_argument("repetitions must be at least 1");
    std::vector<RepOutcome> reps(repetitions);
    auto work = [&](std::uint32_t from, std::uint32_t step) {
        for (std::uint32_t k = from; k < repetitions; k += step) {
            auto c = cfg;
            c.seed = repetition_seed(cfg.seed, k);
            const auto run = simulate(p, c);
            const auto report = make_report(run);
            reps[k] = {report.total_exec_ns, report.avg_tr, report.collisions, report.violations.size()};
        }
    };
    threads = std::max(1u, std::min(threads, repetitions));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    work(t, threads);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    ExperimentStats s;
    s.repetitions = repetitions;
    for (const auto& r : reps) {
        s.exec_ns.push_back(r.exec_ns);
        s.mean_exec_ns += r.exec_ns;
        s.mean_avg_tr += r.avg_tr;
        s.collisions += r.collisions;
        s.violations += r.violations;
    }
    s.mean_exec_ns /= repetitions;
    s.mean_avg_tr /= repetitions;
    auto sorted = s.exec_ns;
    std::sort(sorted.begin(), sorted.end());
    s.min_exec_ns = sorted.front();
    s.max_exec_ns = sorted.back();
    s.p50_exec_ns = percentile(sorted, 0.50);
    s.p90_exec_ns = percentile(sorted, 0.90);
    s.p99_exec_ns = percentile(sorted, 0.99);
    return s;
}

nlohmann::json to_json(const ExperimentStats& s)
{
    return {{"repetitions", s.repetitions},  {"mean_exec_ns", s.mean_exec_ns}, {"p50_exec_ns", s.p50_exec_ns},
            {"p90_exec_ns", s.p90_exec_ns},  {"p99_exec_ns", s.p99_exec_ns},   {"min_exec_ns", s.min_exec_ns},
            {"max_exec_ns", s.max_exec_ns},  {"mean_avg_tr", s.mean_avg_tr},   {"collisions", s.collisions},
            {"violations", s.violations}};
}

}  // namespace qcp
