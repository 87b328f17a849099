#pragma once

#include "mflab/concentration.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace mflab {

using Json = nlohmann::json;

FiniteSpace parse_space(const Json& j);
RateGenerator parse_generator(const Json& j, const FiniteSpace& space);
JumpKernel parse_jump_kernel(const Json& j, const FiniteSpace& space);
/// Kernel family config: {"family": "two_three_body"|"parametrized"|"constant", ...}.
/// The parametrized gamma is restricted to lambda(theta) * P(x,y) with lambda
/// drawn from the named library {affine-clamped, logistic, exp-neg}.
std::shared_ptr<MeanFieldKernel> parse_kernel(const Json& j, const FiniteSpace& space);
Density parse_density(const Json& j, const FiniteSpace& space, bool require_probability = true);

/// FNV-1a hash of the canonical config dump; names the output directory.
std::string config_hash(const Json& j);

/// Throws if any numeric value in the document is NaN or infinite.
void require_finite(const Json& j, const std::string& where);

}  // namespace mflab
