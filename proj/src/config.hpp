#pragma once

#include "fixedpoint.hpp"
#include "model.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace mfg {

using Json = nlohmann::json;

// Parsed CLI configuration. The schema is strict: unknown keys anywhere in
// the document are rejected.
struct RunConfig {
    std::uint64_t seed = 42;
    std::optional<LqSpec> lq_spec;
    std::optional<Json> builtin_model; // {"name": ..., ...}
    std::optional<int> n_steps;
    FixedPointConfig fixedpoint;
    Json experiment; // command-specific block, validated by the runner
    Json canonical;  // full parsed document (with the effective seed)
};

RunConfig parse_config(const std::string& text);

// Re-serialize with the effective seed substituted; this is the document
// that gets hashed and copied into the run directory.
std::string canonical_config(const RunConfig& config);

// Model from either branch of the config. Builtins: "quartic_control"
// (non-quadratic control cost, exercises the iterative minimizer).
MfgModel build_model_from_config(const RunConfig& config);

MfgModel build_quartic_control_model(double q, double m, double b1, double b2, double sigma,
                                     double x0, double T, double theta);

// LqSpec JSON round-trip (fields named exactly b0,b1,b2,m,mbar,n,q,qbar,
// sigma,x0,T; piecewise-constant coefficients as breakpoint/value arrays).
LqSpec lq_spec_from_json(const Json& j);
Json lq_spec_to_json(const LqSpec& spec);

} // namespace mfg
