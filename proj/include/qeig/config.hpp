#pragma once
// JSON experiment configuration: problem specification, scan selection, seed
// and output naming. Parse errors report file, line and column; semantic
// errors report the JSON pointer of the offending node.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qeig/coefficients.hpp"
#include "qeig/operator_spec.hpp"

namespace qeig {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string source;           // file path or synthetic name
    Json raw;                     // full echo for provenance
    std::string kind;             // truncation | splitting | resolution | sampling | cost
    bool has_problem = false;
    TensorOperatorSpec problem;
    SamplingMode sampling = SamplingMode::Spectral;
    Json scan;                    // kind-specific grid and tolerances
    std::uint64_t seed = 1;
    std::string output_stem = "report";
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& source, const std::string& pointer,
                                     const std::string& what)
{
    throw ConfigError(source + ": " + (pointer.empty() ? "/" : pointer) + ": " + what);
}

inline const Json& need(const Json& node, const char* key, const std::string& source,
                        const std::string& pointer)
{
    if (!node.is_object() || !node.contains(key))
        config_fail(source, pointer, std::string("missing required key '") + key + "'");
    return node.at(key);
}

inline CoefficientFn parse_coefficient(const Json& node, const std::string& source,
                                       const std::string& pointer)
{
    const std::string kind = need(node, "kind", source, pointer).get<std::string>();
    std::vector<double> params;
    const Json& pj = need(node, "parameters", source, pointer);
    if (!pj.is_array()) config_fail(source, pointer + "/parameters", "expected an array of numbers");
    for (const auto& v : pj) {
        if (!v.is_number()) config_fail(source, pointer + "/parameters", "expected an array of numbers");
        params.push_back(v.get<double>());
    }
    try {
        if (kind == "constant") {
            if (params.size() != 1)
                throw std::invalid_argument("constant takes exactly one parameter");
            return CoefficientFn::constant(params[0]);
        }
        if (kind == "fourier") return CoefficientFn::fourier(params);
        if (kind == "polynomial") {
            const int sm = node.contains("smoothness") ? node.at("smoothness").get<int>() : 0;
            return CoefficientFn::polynomial(params, sm);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        config_fail(source, pointer, e.what());
    }
    config_fail(source, pointer + "/kind", "unknown coefficient kind '" + kind + "'");
}

inline OperatorSpec1D parse_factor(const Json& node, const std::string& source,
                                   const std::string& pointer)
{
    OperatorSpec1D f;
    f.order = need(node, "order", source, pointer).get<int>();
    if (f.order < 0) config_fail(source, pointer + "/order", "order must be >= 0");
    f.coefficients.assign(std::size_t(f.order) + 1, CoefficientFn::constant(0.0));
    const Json& cj = need(node, "coefficients", source, pointer);
    if (!cj.is_array()) config_fail(source, pointer + "/coefficients", "expected an array");
    std::size_t idx = 0;
    for (const auto& c : cj) {
        const std::string cp = pointer + "/coefficients/" + std::to_string(idx);
        const int s = need(c, "s", source, cp).get<int>();
        if (s < 0 || s > f.order) config_fail(source, cp + "/s", "derivative index out of range");
        f.coefficients[std::size_t(s)] = parse_coefficient(c, source, cp);
        ++idx;
    }
    try {
        f.validate();
    } catch (const std::exception& e) {
        config_fail(source, pointer, e.what());
    }
    return f;
}

inline TensorOperatorSpec parse_problem(const Json& node, const std::string& source,
                                        const std::string& pointer)
{
    TensorOperatorSpec spec;
    spec.dimension = need(node, "dimension", source, pointer).get<int>();
    const Json& tj = need(node, "terms", source, pointer);
    if (!tj.is_array() || tj.empty())
        config_fail(source, pointer + "/terms", "expected a nonempty array");
    std::size_t ti = 0;
    for (const auto& t : tj) {
        const std::string tp = pointer + "/terms/" + std::to_string(ti);
        const Json& fj = need(t, "factors", source, tp);
        if (!fj.is_array() || int(fj.size()) != spec.dimension)
            config_fail(source, tp + "/factors",
                        "expected exactly " + std::to_string(spec.dimension) + " factors");
        std::vector<OperatorSpec1D> factors;
        std::size_t fi = 0;
        for (const auto& f : fj) {
            factors.push_back(parse_factor(f, source, tp + "/factors/" + std::to_string(fi)));
            ++fi;
        }
        spec.terms.push_back(std::move(factors));
        ++ti;
    }
    try {
        spec.validate();
    } catch (const std::exception& e) {
        config_fail(source, pointer, e.what());
    }
    return spec;
}

}

inline ExperimentConfig config_from_json(const Json& j, const std::string& source)
{
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.raw = j;
    const Json& scan = detail::need(j, "scan", source, "");
    cfg.kind = detail::need(scan, "kind", source, "/scan").get<std::string>();
    if (cfg.kind != "truncation" && cfg.kind != "splitting" && cfg.kind != "resolution" &&
        cfg.kind != "sampling" && cfg.kind != "cost")
        detail::config_fail(source, "/scan/kind", "unknown scan kind '" + cfg.kind + "'");
    cfg.scan = scan;
    if (j.contains("problem")) {
        cfg.problem = detail::parse_problem(j.at("problem"), source, "/problem");
        cfg.has_problem = true;
        if (j.at("problem").contains("sampling")) {
            const std::string m = j.at("problem").at("sampling").get<std::string>();
            if (m == "spectral") cfg.sampling = SamplingMode::Spectral;
            else if (m == "pointwise") cfg.sampling = SamplingMode::Pointwise;
            else detail::config_fail(source, "/problem/sampling", "expected 'spectral' or 'pointwise'");
        }
    } else if (cfg.kind != "cost") {
        detail::config_fail(source, "", "missing required key 'problem'");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) cfg.output_stem = j.at("output").get<std::string>();
    return cfg;
}

// Parses a config file; syntax errors are rephrased as "path:line:col: message".
inline ExperimentConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(text.size(), std::size_t(e.byte > 0 ? e.byte - 1 : 0));
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          e.what());
    }
    return config_from_json(j, path);
}

// FNV-1a over the canonical serialization, for report provenance.
inline std::string config_hash(const Json& j)
{
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}
