#pragma once

#include <json.hpp>

#include "invgap/bnn.hpp"
#include "invgap/invariance.hpp"
#include "invgap/linear_model.hpp"
#include "invgap/sweep.hpp"

namespace invgap {

using Json = nlohmann::json;

/// Gaussian as {"mean": [...], "diag": [...]} or {"mean": [...], "cov":
/// [...row-major...]} depending on the representation.
Json gaussian_to_json(const MomentGaussian& g);
MomentGaussian gaussian_from_json(const Json& j);

Json model_to_json(const TranslationLinearModel& model);
TranslationLinearModel model_from_json(const Json& j);

Json theta_to_json(const LikelihoodParams& theta);
LikelihoodParams theta_from_json(const Json& j);

Json mlp_spec_to_json(const MlpSpec& spec);
MlpSpec mlp_spec_from_json(const Json& j);

Json sweep_config_to_json(const SweepConfig& config);
SweepConfig sweep_config_from_json(const Json& j);

Json mc_estimate_to_json(const McEstimate& est);
Json condition_report_to_json(const ConditionReport& report);
Json gap_identity_to_json(const GapIdentityReport& report);
Json fit_result_to_json(const LayerwiseFitResult& result);

Vector vector_from_json(const Json& j);
Json vector_to_json(const Vector& v);

}  // namespace invgap
