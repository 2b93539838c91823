#pragma once

#include "verify/acceptance.hpp"

namespace spadapt::verify {

// Monte Carlo criteria. Each fills the result fields and leaves timing to the caller.
void rate_slopes(const VerifyOptions& options, CriterionResult& result);
void spatial_adaptation(const VerifyOptions& options, CriterionResult& result);
void band_coverage(const VerifyOptions& options, CriterionResult& result);
void gp_non_adaptation(const VerifyOptions& options, CriterionResult& result);

}  // namespace spadapt::verify
