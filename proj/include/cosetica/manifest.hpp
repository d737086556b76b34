#ifndef COSETICA_MANIFEST_HPP
#define COSETICA_MANIFEST_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosetica/newton_engine.hpp"

// Run provenance: every separate invocation writes a manifest capturing the
// input, the full effective configuration, a checksum of the data, and a
// summary of the trace.  The manifest round-trips losslessly through JSON.

namespace cosetica {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::uint64_t fnv1a(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_checksum: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a(bytes.data(), bytes.size());
}

struct RunManifest {
    std::string input_path;
    SolverConfig config;
    bool centered = true;
    std::vector<std::string> output_paths;
    std::string tool_version = kToolVersion;
    std::uint64_t data_checksum = 0;
    double wall_time_s = 0.0;
    // trace summary
    Index warm_steps = 0;
    Index newton_steps = 0;
    bool converged = false;
    double final_delta_norm = 0.0;
    double final_cost = 0.0;
    std::optional<double> convergence_order;
    std::optional<std::string> failure;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["input_path"] = input_path;
        j["config"] = {{"cost_case", static_cast<int>(config.cost_case)},
                       {"tol_delta", config.tol_delta},
                       {"max_iters", config.max_iters},
                       {"damping", config.damping == Damping::halving ? "halving" : "none"},
                       {"max_step_norm", config.max_step_norm},
                       {"warm_steps", config.warm_start.n_steps},
                       {"warm_rate", config.warm_start.rate},
                       {"warm_barrier", config.warm_start.barrier},
                       {"seed", config.seed},
                       {"renormalize", config.renormalize}};
        j["centered"] = centered;
        j["output_paths"] = output_paths;
        j["tool_version"] = tool_version;
        j["data_checksum"] = data_checksum;
        j["wall_time_s"] = wall_time_s;
        j["trace"] = {{"warm_steps", warm_steps},
                      {"newton_steps", newton_steps},
                      {"converged", converged},
                      {"final_delta_norm", final_delta_norm},
                      {"final_cost", final_cost}};
        if (convergence_order)
            j["trace"]["convergence_order"] = *convergence_order;
        if (failure) j["failure"] = *failure;
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.input_path = j.at("input_path").get<std::string>();
        const auto& c = j.at("config");
        m.config.cost_case = c.at("cost_case").get<int>() == 2 ? CostCase::case2 : CostCase::case1;
        m.config.tol_delta = c.at("tol_delta").get<double>();
        m.config.max_iters = c.at("max_iters").get<int>();
        m.config.damping =
            c.at("damping").get<std::string>() == "halving" ? Damping::halving : Damping::none;
        m.config.max_step_norm = c.at("max_step_norm").get<double>();
        m.config.warm_start.n_steps = c.at("warm_steps").get<int>();
        m.config.warm_start.rate = c.at("warm_rate").get<double>();
        m.config.warm_start.barrier = c.at("warm_barrier").get<double>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        m.config.renormalize = c.at("renormalize").get<bool>();
        m.centered = j.at("centered").get<bool>();
        m.output_paths = j.at("output_paths").get<std::vector<std::string>>();
        m.tool_version = j.at("tool_version").get<std::string>();
        m.data_checksum = j.at("data_checksum").get<std::uint64_t>();
        m.wall_time_s = j.at("wall_time_s").get<double>();
        const auto& t = j.at("trace");
        m.warm_steps = t.at("warm_steps").get<Index>();
        m.newton_steps = t.at("newton_steps").get<Index>();
        m.converged = t.at("converged").get<bool>();
        m.final_delta_norm = t.at("final_delta_norm").get<double>();
        m.final_cost = t.at("final_cost").get<double>();
        if (t.contains("convergence_order"))
            m.convergence_order = t.at("convergence_order").get<double>();
        if (j.contains("failure")) m.failure = j.at("failure").get<std::string>();
        return m;
    }

    friend bool operator==(const RunManifest& a, const RunManifest& b) {
        return a.to_json() == b.to_json();
    }
};

}  // namespace cosetica

#endif
