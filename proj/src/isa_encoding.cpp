#include "qcp/isa.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace qcp {

namespace {

// opcode[31:26]
constexpr std::uint32_t kOpEnd = 0x00;
constexpr std::uint32_t kOpQuantumBase = 0x00;  // + gate code (X=1 .. MEAS=10)
constexpr std::uint32_t kOpClassicalBase = 0x10;
constexpr std::uint32_t kOpMrce = 0x20;

constexpr std::uint32_t bits(std::uint32_t value, int hi, int lo)
{
    const std::uint32_t width = static_cast<std::uint32_t>(hi - lo + 1);
    const std::uint32_t mask = width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
    return (value & mask) << lo;
}

constexpr std::uint32_t field(std::uint32_t word, int hi, int lo)
{
    const std::uint32_t width = static_cast<std::uint32_t>(hi - lo + 1);
    const std::uint32_t mask = width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
    return (word >> lo) & mask;
}

void check_fits(std::uint64_t value, int width, const char* what)
{
    if (value >= (std::uint64_t{1} << width))
        throw EncodeError(std::string(what) + " " + std::to_string(value) + " does not fit " +
                          std::to_string(width) + " bits");
}

void check_reg(int r, int limit, const char* what)
{
    if (r < 0 || r >= limit) throw EncodeError(std::string(what) + " " + std::to_string(r) + " out of range");
}

}  // namespace

std::uint32_t encode_instruction(const Instruction& i)
{
    switch (i.kind) {
    case InstrKind::EndBlock:
        return bits(kOpEnd, 31, 26);

    case InstrKind::Mrce: {
        check_reg(i.result_reg, kResultRegisters, "q_result_addr");
        check_fits(i.qubits[0], 6, "q_target_addr");
        if (!is_mrce_operation(i.op_if_0) || !is_mrce_operation(i.op_if_1))
            throw EncodeError("MRCE operations must be NOP or a fixed single-qubit gate");
        return bits(kOpMrce, 31, 26) | bits(static_cast<std::uint32_t>(i.result_reg), 25, 20) |
               bits(i.qubits[0], 19, 14) | bits(static_cast<std::uint32_t>(i.op_if_0), 13, 7) |
               bits(static_cast<std::uint32_t>(i.op_if_1), 6, 0);
    }

    case InstrKind::Quantum: {
        if (i.gate == Gate::NOP) throw EncodeError("NOP is not an issuable quantum gate");
        check_fits(i.timing_label, 10, "timing label");
        check_fits(i.qubits[0], 6, "qubit");
        std::uint32_t w = bits(kOpQuantumBase + static_cast<std::uint32_t>(i.gate), 31, 26) |
                          bits(i.timing_label, 25, 16) | bits(i.qubits[0], 15, 10);
        if (is_two_qubit(i.gate)) {
            check_fits(i.qubits[1], 6, "qubit");
            w |= bits(i.qubits[1], 9, 4);
        } else if (is_rotation(i.gate)) {
            check_fits(i.angle, 10, "angle");
            w |= bits(i.angle, 9, 0);
        } else if (i.gate == Gate::MEAS) {
            check_reg(i.result_reg, kResultRegisters, "result register");
            w |= bits(static_cast<std::uint32_t>(i.result_reg), 9, 4);
        }
        return w;
    }

    case InstrKind::Classical:
        break;
    }

    std::uint32_t w = bits(kOpClassicalBase + static_cast<std::uint32_t>(i.op), 31, 26);
    switch (i.op) {
    case ClassicalOp::LDI:
        check_reg(i.rd, kGpRegisters, "register");
        if (i.imm < -(1 << 20) || i.imm >= (1 << 20)) throw EncodeError("immediate does not fit 21 bits");
        return w | bits(i.rd, 25, 21) | bits(static_cast<std::uint32_t>(i.imm), 20, 0);
    case ClassicalOp::MOV:
        check_reg(i.rd, kGpRegisters, "register");
        check_reg(i.rs1, kGpRegisters, "register");
        return w | bits(i.rd, 25, 21) | bits(i.rs1, 20, 16);
    case ClassicalOp::ADD:
    case ClassicalOp::SUB:
    case ClassicalOp::AND:
    case ClassicalOp::OR:
        check_reg(i.rd, kGpRegisters, "register");
        check_reg(i.rs1, kGpRegisters, "register");
        check_reg(i.rs2, kGpRegisters, "register");
        return w | bits(i.rd, 25, 21) | bits(i.rs1, 20, 16) | bits(i.rs2, 15, 11);
    case ClassicalOp::CMP:
        check_reg(i.rs1, kGpRegisters, "register");
        check_reg(i.rs2, kGpRegisters, "register");
        return w | bits(i.rs1, 20, 16) | bits(i.rs2, 15, 11);
    case ClassicalOp::BR:
        check_fits(i.target, 23, "branch target");
        return w | bits(static_cast<std::uint32_t>(i.cond), 25, 23) | bits(i.target, 22, 0);
    case ClassicalOp::JMP:
        check_fits(i.target, 26, "jump target");
        return w | bits(i.target, 25, 0);
    case ClassicalOp::FMR:
        check_reg(i.rd, kGpRegisters, "register");
        check_reg(i.result_reg, kResultRegisters, "result register");
        return w | bits(i.rd, 25, 21) | bits(static_cast<std::uint32_t>(i.result_reg), 20, 15);
    }
    throw EncodeError("unknown classical operation");
}

Instruction decode_instruction(std::uint32_t w)
{
    const std::uint32_t opcode = field(w, 31, 26);
    if (opcode == kOpEnd) return Instruction::end();
    if (opcode == kOpMrce) {
        const auto op0 = field(w, 13, 7);
        const auto op1 = field(w, 6, 0);
        if (!is_mrce_operation(static_cast<Gate>(op0 & 0xF)) || op0 > 4 || op1 > 4)
            throw EncodeError("bad MRCE operation code");
        return Instruction::mrce(static_cast<int>(field(w, 25, 20)), static_cast<int>(field(w, 19, 14)),
                                 static_cast<Gate>(op0), static_cast<Gate>(op1));
    }
    if (opcode >= 1 && opcode <= static_cast<std::uint32_t>(Gate::MEAS)) {
        const auto g = static_cast<Gate>(opcode);
        const auto label = field(w, 25, 16);
        const int q0 = static_cast<int>(field(w, 15, 10));
        if (is_two_qubit(g)) return Instruction::quantum(label, g, {q0, static_cast<int>(field(w, 9, 4))});
        if (g == Gate::MEAS) return Instruction::measure(label, q0, static_cast<int>(field(w, 9, 4)));
        auto i = Instruction::quantum(label, g, {q0});
        if (is_rotation(g)) i.angle = static_cast<std::uint16_t>(field(w, 9, 0));
        return i;
    }
    if (opcode >= kOpClassicalBase && opcode <= kOpClassicalBase + static_cast<std::uint32_t>(ClassicalOp::FMR)) {
        const auto op = static_cast<ClassicalOp>(opcode - kOpClassicalBase);
        const int rd = static_cast<int>(field(w, 25, 21));
        const int rs1 = static_cast<int>(field(w, 20, 16));
        const int rs2 = static_cast<int>(field(w, 15, 11));
        switch (op) {
        case ClassicalOp::LDI: {
            auto raw = field(w, 20, 0);
            std::int32_t imm = static_cast<std::int32_t>(raw);
            if (raw & (1u << 20)) imm -= (1 << 21);
            return Instruction::ldi(rd, imm);
        }
        case ClassicalOp::MOV:
            return Instruction::alu(op, rd, rs1);
        case ClassicalOp::CMP:
            return Instruction::cmp(rs1, rs2);
        case ClassicalOp::BR: {
            const auto c = field(w, 25, 23);
            if (c > static_cast<std::uint32_t>(Cond::LE)) throw EncodeError("bad branch condition");
            return Instruction::br(static_cast<Cond>(c), field(w, 22, 0));
        }
        case ClassicalOp::JMP:
            return Instruction::jmp(field(w, 25, 0));
        case ClassicalOp::FMR:
            return Instruction::fmr(rd, static_cast<int>(field(w, 20, 15)));
        default:
            return Instruction::alu(op, rd, rs1, rs2);
        }
    }
    throw EncodeError("unknown opcode " + std::to_string(opcode));
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr char kMagic[8] = {'Q', 'A', 'P', 'E', '0', '0', '0', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos)
{
    if (pos + 4 > in.size()) throw EncodeError("truncated binary program");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in[pos + k]) << (8 * k);
    pos += 4;
    return v;
}

}  // namespace

bool is_binary_program(std::span<const std::uint8_t> bytes)
{
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) == 0;
}

std::vector<std::uint8_t> write_binary(const Program& p)
{
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : p.blocks) {
        nlohmann::json e{{"name", b.name}, {"start", b.pc_start}, {"end", b.pc_end}};
        if (b.priority)
            e["prio"] = *b.priority;
        else
            e["deps"] = b.deps;
        blocks.push_back(std::move(e));
    }
    const std::string header = nlohmann::json{{"qubits", p.qubit_count}, {"blocks", blocks}}.dump();

    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out.insert(out.end(), header.begin(), header.end());
    put_u32(out, static_cast<std::uint32_t>(p.instructions.size()));
    for (const auto& i : p.instructions) put_u32(out, encode_instruction(i));
    return out;
}

Program read_binary(std::span<const std::uint8_t> bytes)
{
    if (!is_binary_program(bytes)) throw EncodeError("missing QAPE0001 magic");
    std::size_t pos = 8;
    const auto len = get_u32(bytes, pos);
    if (pos + len > bytes.size()) throw EncodeError("truncated block section");
    Program p;
    try {
        auto j = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                       bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
        p.qubit_count = j.at("qubits").get<std::uint32_t>();
        for (const auto& e : j.at("blocks")) {
            BlockDirective b;
            b.name = e.at("name").get<std::string>();
            b.pc_start = e.at("start").get<std::uint32_t>();
            b.pc_end = e.at("end").get<std::uint32_t>();
            if (e.contains("prio"))
                b.priority = e.at("prio").get<std::uint32_t>();
            else
                b.deps = e.at("deps").get<std::vector<std::string>>();
            p.blocks.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw EncodeError(std::string("bad block section: ") + e.what());
    }
    pos += len;
    const auto n = get_u32(bytes, pos);
    p.instructions.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) p.instructions.push_back(decode_instruction(get_u32(bytes, pos)));
    if (pos != bytes.size()) throw EncodeError("trailing bytes after instruction words");
    return p;
}

Program load_program_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open program '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (is_binary_program(bytes)) return read_binary(bytes);
    return parse_program(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace qcp
