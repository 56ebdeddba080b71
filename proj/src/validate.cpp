#include <algorithm>
#include <map>
#include <set>

#include "qcp/config.hpp"
#include "qcp/isa.hpp"
#include "qcp/program.hpp"

namespace qcp {

namespace {

class Validator {
public:
    Validator(const Program& p, const MachineConfig& cfg) : p_(p), cfg_(cfg) {}

    std::vector<Diagnostic> run()
    {
        check_capacity();
        check_operands();
        check_blocks();
        check_result_producers();
        return std::move(out_);
    }

private:
    std::string at_pc(std::size_t pc) const
    {
        if (pc < p_.instruction_lines.size()) return "line " + std::to_string(p_.instruction_lines[pc]);
        return "pc " + std::to_string(pc);
    }

    std::string at_block(std::size_t b) const
    {
        if (b < p_.block_lines.size()) return "line " + std::to_string(p_.block_lines[b]);
        return "block " + p_.blocks[b].name;
    }

    void add(std::string loc, std::string msg) { out_.push_back({std::move(loc), std::move(msg)}); }

    void check_capacity()
    {
        if (p_.blocks.size() > BlockInfoTable::kCapacity)
            add(at_block(BlockInfoTable::kCapacity), "block table capacity exceeded (" +
                                                         std::to_string(p_.blocks.size()) + " > " +
                                                         std::to_string(BlockInfoTable::kCapacity) + ")");
        if (p_.blocks.empty() && !p_.instructions.empty()) add("pc 0", "program has instructions but no blocks");
    }

    void check_operands()
    {
        const std::uint32_t qubits = cfg_.qpu.qubit_count ? cfg_.qpu.qubit_count : p_.qubit_count;
        if (qubits > kMaxQubits) add("line 1", "qubit count exceeds " + std::to_string(kMaxQubits));
        if (cfg_.qpu.qubit_count && p_.qubit_count > cfg_.qpu.qubit_count)
            add("line 1", "program declares more qubits than the machine provides");
        for (std::size_t pc = 0; pc < p_.instructions.size(); ++pc) {
            const auto& i = p_.instructions[pc];
            for (auto q : i.targets())
                if (q >= qubits) add(at_pc(pc), "qubit q" + std::to_string(q) + " out of range");
            if ((i.is_quantum() && i.gate == Gate::MEAS) || i.kind == InstrKind::Mrce ||
                (i.kind == InstrKind::Classical && i.op == ClassicalOp::FMR))
                if (i.result_reg < 0 || i.result_reg >= kResultRegisters)
                    add(at_pc(pc), "result register out of range");
            if (i.kind == InstrKind::Classical)
                if (i.rd >= kGpRegisters || i.rs1 >= kGpRegisters || i.rs2 >= kGpRegisters)
                    add(at_pc(pc), "register out of range");
            if (i.is_quantum() && i.timing_label > kMaxTimingLabel) add(at_pc(pc), "timing label too large");
            if (i.is_quantum() && is_two_qubit(i.gate) && i.qubits[0] == i.qubits[1])
                add(at_pc(pc), "two-qubit gate needs distinct qubits");
            if (i.kind == InstrKind::Mrce && (!is_mrce_operation(i.op_if_0) || !is_mrce_operation(i.op_if_1)))
                add(at_pc(pc), "MRCE operation outside the single-qubit set");
        }
    }

    void check_blocks()
    {
        std::map<std::string, std::size_t> names;
        for (std::size_t b = 0; b < p_.blocks.size(); ++b)
            if (!names.emplace(p_.blocks[b].name, b).second)
                add(at_block(b), "duplicate block name '" + p_.blocks[b].name + "'");

        const bool prio = p_.uses_priorities();
        for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
            const auto& d = p_.blocks[b];
            if (d.priority.has_value() != prio) add(at_block(b), "mixed deps/prio styles in one program");
            if (d.pc_start > d.pc_end) {
                add(at_block(b), "block '" + d.name + "' has start > end");
                continue;
            }
            if (d.pc_end >= p_.instructions.size()) {
                add(at_block(b), "block '" + d.name + "' extends past the last instruction");
                continue;
            }
            for (std::size_t o = b + 1; o < p_.blocks.size(); ++o) {
                const auto& e = p_.blocks[o];
                if (e.pc_start <= e.pc_end && d.pc_start <= e.pc_end && e.pc_start <= d.pc_end)
                    add(at_block(o), "block '" + e.name + "' overlaps block '" + d.name + "'");
            }
            for (const auto& dep : d.deps) {
                auto it = names.find(dep);
                if (it == names.end())
                    add(at_block(b), "unresolved dependency '" + dep + "'");
                else if (it->second == b)
                    add(at_block(b), "block '" + d.name + "' depends on itself");
            }
            check_control_flow(d);
        }
        if (!prio && out_.empty()) {
            try {
                build_table(p_);
            } catch (const BuildError& e) {
                add("block table", e.what());
            }
        }
    }

    // Every instruction reachable from pc_start must be able to leave the block
    // (END or falling past pc_end), and branches must stay inside the block.
    void check_control_flow(const BlockDirective& d)
    {
        const std::size_t n = d.pc_end - d.pc_start + 1;
        const std::size_t exit = n;
        std::vector<std::vector<std::size_t>> succ(n);
        bool bad_target = false;
        for (std::size_t k = 0; k < n; ++k) {
            const auto pc = d.pc_start + k;
            const auto& i = p_.instructions[pc];
            auto next = k + 1 < n ? k + 1 : exit;
            if (i.kind == InstrKind::EndBlock) {
                succ[k].push_back(exit);
                continue;
            }
            if (i.is_branch()) {
                if (i.target < d.pc_start || i.target > d.pc_end) {
                    add(at_pc(pc), "branch target " + std::to_string(i.target) + " outside block '" + d.name + "'");
                    bad_target = true;
                    continue;
                }
                succ[k].push_back(i.target - d.pc_start);
                if (i.op == ClassicalOp::BR) succ[k].push_back(next);
                continue;
            }
            succ[k].push_back(next);
        }
        if (bad_target) return;

        std::vector<char> reach(n + 1, 0), exits(n + 1, 0);
        std::vector<std::size_t> stack{0};
        if (n > 0) reach[0] = 1;
        while (!stack.empty()) {
            auto k = stack.back();
            stack.pop_back();
            if (k == exit) continue;
            for (auto s : succ[k])
                if (!reach[s]) {
                    reach[s] = 1;
                    stack.push_back(s);
                }
        }
        exits[exit] = 1;
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t k = 0; k < n; ++k)
                if (!exits[k] && std::any_of(succ[k].begin(), succ[k].end(), [&](auto s) { return exits[s]; })) {
                    exits[k] = 1;
                    changed = true;
                }
        }
        for (std::size_t k = 0; k < n; ++k)
            if (reach[k] && !exits[k]) {
                add(at_pc(d.pc_start + k), "block '" + d.name + "' may not terminate");
                return;
            }
    }

    void check_result_producers()
    {
        std::set<int> produced;
        for (const auto& i : p_.instructions)
            if (i.is_quantum() && i.gate == Gate::MEAS) produced.insert(i.result_reg);
        for (std::size_t pc = 0; pc < p_.instructions.size(); ++pc) {
            const auto& i = p_.instructions[pc];
            const bool reads = i.kind == InstrKind::Mrce || (i.kind == InstrKind::Classical && i.op == ClassicalOp::FMR);
            if (reads && !produced.count(i.result_reg))
                add(at_pc(pc), "result register never produced: r" + std::to_string(i.result_reg));
        }
    }

    const Program& p_;
    const MachineConfig& cfg_;
    std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_program(const Program& p, const MachineConfig& cfg)
{
    return Validator(p, cfg).run();
}

}  // namespace qcp
