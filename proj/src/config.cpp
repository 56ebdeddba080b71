#include "qcp/config.hpp"

#include <fstream>

namespace qcp {

using nlohmann::json;

namespace {

const char* dependency_name(DependencyChoice d)
{
    switch (d) {
    case DependencyChoice::Direct:
        return "direct";
    case DependencyChoice::Priority:
        return "priority";
    case DependencyChoice::Auto:
        break;
    }
    return "auto";
}

DependencyChoice dependency_from(const std::string& s)
{
    if (s == "auto") return DependencyChoice::Auto;
    if (s == "direct") return DependencyChoice::Direct;
    if (s == "priority") return DependencyChoice::Priority;
    throw ConfigError("unknown dependency representation '" + s + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

void check_config(const MachineConfig& cfg)
{
    if (cfg.cores < 1) throw ConfigError("cores must be >= 1");
    switch (cfg.superscalar_width) {
    case 1:
    case 2:
    case 4:
    case 8:
        break;
    default:
        throw ConfigError("superscalar_width must be one of 1, 2, 4, 8");
    }
    if (!(cfg.clock_period_ns > 0)) throw ConfigError("clock_period_ns must be > 0");
    if (!(cfg.gate_time_ns > 0)) throw ConfigError("gate_time_ns must be > 0");
    const auto& q = cfg.qpu;
    if (q.single_gate_ns < 0 || q.two_gate_ns < 0 || q.meas_pulse_ns < 0 || q.daq_ns < 0 ||
        q.jitter_ns < 0)
        throw ConfigError("durations must be >= 0");
    if (q.qubit_count > 64) throw ConfigError("qubit_count must be <= 64");
    auto bias_ok = [](double b) { return b >= 0.0 && b <= 1.0; };
    if (!bias_ok(q.outcome_bias.default_bias)) throw ConfigError("outcome bias must be in [0, 1]");
    for (auto& [pc, b] : q.outcome_bias.by_pc)
        if (!bias_ok(b)) throw ConfigError("outcome bias must be in [0, 1]");
    if (cfg.costs.fetch_bandwidth == 0) throw ConfigError("fetch_bandwidth must be >= 1");
    if (cfg.costs.pipeline_depth == 0) throw ConfigError("pipeline_depth must be >= 1");
    if (cfg.costs.timing_queue_capacity == 0) throw ConfigError("timing_queue_capacity must be >= 1");
}

json to_json(const MachineConfig& cfg)
{
    json bias_map = json::object();
    for (auto& [pc, b] : cfg.qpu.outcome_bias.by_pc) bias_map[std::to_string(pc)] = b;
    return json{
        {"cores", cfg.cores},
        {"superscalar_width", cfg.superscalar_width},
        {"clock_period_ns", cfg.clock_period_ns},
        {"gate_time_ns", cfg.gate_time_ns},
        {"seed", cfg.seed},
        {"dependency", dependency_name(cfg.dependency)},
        {"prefetch", cfg.prefetch},
        {"initial_prefetch", cfg.initial_prefetch},
        {"ideal_scheduling", cfg.ideal_scheduling},
        {"deadlock_timeout", cfg.deadlock_timeout},
        {"qpu",
         {{"qubit_count", cfg.qpu.qubit_count},
          {"single_gate_ns", cfg.qpu.single_gate_ns},
          {"two_gate_ns", cfg.qpu.two_gate_ns},
          {"meas_pulse_ns", cfg.qpu.meas_pulse_ns},
          {"daq_ns", cfg.qpu.daq_ns},
          {"jitter_ns", cfg.qpu.jitter_ns},
          {"outcome_bias", {{"default", cfg.qpu.outcome_bias.default_bias}, {"by_pc", bias_map}}}}},
        {"costs",
         {{"t_switch", cfg.costs.t_switch},
          {"sched_response", cfg.costs.sched_response},
          {"fetch_bandwidth", cfg.costs.fetch_bandwidth},
          {"branch_penalty", cfg.costs.branch_penalty},
          {"ctx_switch_cycles", cfg.costs.ctx_switch_cycles},
          {"pipeline_depth", cfg.costs.pipeline_depth},
          {"timing_queue_capacity", cfg.costs.timing_queue_capacity}}},
    };
}

MachineConfig config_from_json(const json& j)
{
    MachineConfig cfg;
    try {
        read(j, "cores", cfg.cores);
        read(j, "superscalar_width", cfg.superscalar_width);
        read(j, "clock_period_ns", cfg.clock_period_ns);
        read(j, "gate_time_ns", cfg.gate_time_ns);
        read(j, "seed", cfg.seed);
        if (auto it = j.find("dependency"); it != j.end())
            cfg.dependency = dependency_from(it->get<std::string>());
        read(j, "prefetch", cfg.prefetch);
        read(j, "initial_prefetch", cfg.initial_prefetch);
        read(j, "ideal_scheduling", cfg.ideal_scheduling);
        read(j, "deadlock_timeout", cfg.deadlock_timeout);
        if (auto q = j.find("qpu"); q != j.end()) {
            read(*q, "qubit_count", cfg.qpu.qubit_count);
            read(*q, "single_gate_ns", cfg.qpu.single_gate_ns);
            read(*q, "two_gate_ns", cfg.qpu.two_gate_ns);
            read(*q, "meas_pulse_ns", cfg.qpu.meas_pulse_ns);
            read(*q, "daq_ns", cfg.qpu.daq_ns);
            read(*q, "jitter_ns", cfg.qpu.jitter_ns);
            if (auto b = q->find("outcome_bias"); b != q->end()) {
                if (b->is_number()) {
                    cfg.qpu.outcome_bias.default_bias = b->get<double>();
                } else {
                    read(*b, "default", cfg.qpu.outcome_bias.default_bias);
                    if (auto m = b->find("by_pc"); m != b->end())
                        for (auto& [k, v] : m->items())
                            cfg.qpu.outcome_bias.by_pc[static_cast<std::uint32_t>(std::stoul(k))] =
                                v.get<double>();
                }
            }
        }
        if (auto c = j.find("costs"); c != j.end()) {
            read(*c, "t_switch", cfg.costs.t_switch);
            read(*c, "sched_response", cfg.costs.sched_response);
            read(*c, "fetch_bandwidth", cfg.costs.fetch_bandwidth);
            read(*c, "branch_penalty", cfg.costs.branch_penalty);
            read(*c, "ctx_switch_cycles", cfg.costs.ctx_switch_cycles);
            read(*c, "pipeline_depth", cfg.costs.pipeline_depth);
            read(*c, "timing_queue_capacity", cfg.costs.timing_queue_capacity);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

MachineConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

}  // namespace qcp
