#pragma once

#include <nlohmann/json.hpp>

#include "ncerg/algebra.hpp"
#include "ncerg/ergodic.hpp"
#include "ncerg/kernels.hpp"
#include "ncerg/rearrangement.hpp"

namespace ncerg {

// Interchange formats. Doubles are emitted as shortest round-trip decimals
// (nlohmann's writer), so serialize/parse cycles are bit-exact.

/// [[dim, weight], ...]
nlohmann::json shape_to_json(const AlgebraShape& shape);
AlgebraShape shape_from_json(const nlohmann::json& j);

/// {"shape": [[dim, weight], ...], "blocks": [[[[re, im], ...], ...], ...]}
nlohmann::json operator_to_json(const Operator& x);
Operator operator_from_json(const nlohmann::json& j);

/// [[value, mass], ...] descending
nlohmann::json step_function_to_json(const StepFunction& f);
StepFunction step_function_from_json(const nlohmann::json& j);

/// {"shape": ..., "recipe": ...}; kernels built from raw superoperators have
/// no re-expandable recipe and are rejected.
nlohmann::json kernel_to_json(const KernelRep& kernel);
KernelRep kernel_from_json(const nlohmann::json& j);

nlohmann::json certification_to_json(const Certification& cert);
nlohmann::json witness_to_json(const ProjectionWitness& w, bool include_operators);
nlohmann::json trajectory_to_json(const Trajectory& t, bool include_operators);
nlohmann::json prop1_report_to_json(const Prop1Report& rep, bool include_operators);
nlohmann::json theorem_report_to_json(const TheoremReport& rep, bool include_operators);

}  // namespace ncerg
