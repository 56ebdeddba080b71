#pragma once

// Timed quantum/classical assembly: instruction model, text grammar,
// 32-bit encoding and static validation.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcp {

inline constexpr int kMaxQubits = 64;
inline constexpr int kGpRegisters = 32;
inline constexpr int kResultRegisters = 64;
// r24..r31 are shared by every core; single-cycle atomic read-modify-write.
inline constexpr int kSharedRegisterBase = 24;
inline constexpr int kAngleSteps = 1024;
inline constexpr std::uint32_t kMaxTimingLabel = 1023;

enum class InstrKind : std::uint8_t { Quantum, Classical, Mrce, EndBlock };

enum class Gate : std::uint8_t { NOP, X, Y, Z, H, RX, RY, RZ, CNOT, CZ, MEAS };

enum class ClassicalOp : std::uint8_t { LDI, MOV, ADD, SUB, AND, OR, CMP, BR, JMP, FMR };

enum class Cond : std::uint8_t { EQ, NE, LT, GE, GT, LE };

std::string_view gate_name(Gate g);
std::optional<Gate> gate_from_name(std::string_view name);
std::string_view classical_name(ClassicalOp op);
std::string_view cond_name(Cond c);
int gate_arity(Gate g);
bool is_rotation(Gate g);
bool is_two_qubit(Gate g);
// Gates an MRCE instruction may select: identity plus the fixed single-qubit set.
bool is_mrce_operation(Gate g);

struct Instruction {
    InstrKind kind = InstrKind::EndBlock;

    // Quantum
    std::uint32_t timing_label = 0;
    Gate gate = Gate::NOP;
    std::uint16_t angle = 0;  // units of 1/1024 turn
    std::array<std::uint8_t, 2> qubits{};
    std::uint8_t qubit_count = 0;
    std::int16_t result_reg = -1;  // MEAS destination, MRCE/FMR source

    // Classical
    ClassicalOp op = ClassicalOp::LDI;
    std::uint8_t rd = 0;
    std::uint8_t rs1 = 0;
    std::uint8_t rs2 = 0;
    std::int32_t imm = 0;
    Cond cond = Cond::EQ;
    std::uint32_t target = 0;

    // MRCE (target qubit is qubits[0], source is result_reg)
    Gate op_if_0 = Gate::NOP;
    Gate op_if_1 = Gate::NOP;

    bool operator==(const Instruction&) const = default;

    std::span<const std::uint8_t> targets() const { return {qubits.data(), qubit_count}; }
    bool is_quantum() const { return kind == InstrKind::Quantum; }
    bool is_branch() const
    {
        return kind == InstrKind::Classical && (op == ClassicalOp::BR || op == ClassicalOp::JMP);
    }
    double angle_radians() const;

    static Instruction quantum(std::uint32_t label, Gate g, std::span<const int> qs);
    static Instruction quantum(std::uint32_t label, Gate g, std::initializer_list<int> qs);
    static Instruction rotation(std::uint32_t label, Gate g, int q, double radians);
    static Instruction measure(std::uint32_t label, int q, int result_reg);
    static Instruction ldi(int rd, std::int32_t imm);
    static Instruction alu(ClassicalOp op, int rd, int rs1, int rs2 = 0);
    static Instruction cmp(int rs1, int rs2);
    static Instruction br(Cond c, std::uint32_t target);
    static Instruction jmp(std::uint32_t target);
    static Instruction fmr(int rd, int result_reg);
    static Instruction mrce(int result_reg, int target_qubit, Gate op0, Gate op1);
    static Instruction end();
};

std::uint16_t quantize_angle(double radians);

struct BlockDirective {
    std::string name;
    std::uint32_t pc_start = 0;
    std::uint32_t pc_end = 0;
    std::vector<std::string> deps;          // direct style
    std::optional<std::uint32_t> priority;  // priority style

    bool operator==(const BlockDirective&) const = default;
};

struct Program {
    std::vector<Instruction> instructions;
    std::vector<BlockDirective> blocks;
    std::uint32_t qubit_count = 0;
    // Source line per instruction and per block directive; empty for generated programs.
    std::vector<std::uint32_t> instruction_lines;
    std::vector<std::uint32_t> block_lines;

    bool operator==(const Program& o) const
    {
        return instructions == o.instructions && blocks == o.blocks && qubit_count == o.qubit_count;
    }

    bool uses_priorities() const;
    std::size_t quantum_count() const;
    std::size_t classical_count() const;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::uint32_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line)
    {
    }
    std::uint32_t line() const { return line_; }

private:
    std::uint32_t line_;
};

class EncodeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

Program parse_program(std::string_view text);
std::string print_instruction(const Instruction& i);
std::string print_program(const Program& p);

std::uint32_t encode_instruction(const Instruction& i);
Instruction decode_instruction(std::uint32_t word);

// "QAPE0001" magic, u32 JSON length, JSON block section, u32 word count, words (all LE).
std::vector<std::uint8_t> write_binary(const Program& p);
Program read_binary(std::span<const std::uint8_t> bytes);
bool is_binary_program(std::span<const std::uint8_t> bytes);

// Loads a text or binary program from disk.
Program load_program_file(const std::string& path);

struct MachineConfig;

struct Diagnostic {
    std::string location;  // "line N", "pc N" or "block NAME"
    std::string message;
};

std::vector<Diagnostic> validate_program(const Program& p, const MachineConfig& cfg);

}  // namespace qcp
