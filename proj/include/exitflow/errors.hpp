#ifndef EXITFLOW_ERRORS_HPP
#define EXITFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace exitflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// model catalog
struct NonEvaluable : Error { using Error::Error; };
struct AssumptionViolated : Error { using Error::Error; };
struct UnknownModel : Error { using Error::Error; };
struct BadParameter : Error { using Error::Error; };

// flow / quadrature
struct BlowUp : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct SingularIntegrand : Error { using Error::Error; };
struct DivergentIntegral : Error { using Error::Error; };

// sde engine
struct BadEpsilon : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct OverflowGuard : Error { using Error::Error; };

// limit law
struct GridTooShort : Error { using Error::Error; };

// branching
struct SingularityHit : Error { using Error::Error; };
struct DomainCap : Error { using Error::Error; };
struct IterationDiverged : Error { using Error::Error; };

// scale analysis
struct ScaleDiverges : Error { using Error::Error; };
struct HypothesesFail : Error { using Error::Error; };

// stats / cli
struct EmptySample : Error { using Error::Error; };

}  // namespace exitflow

#endif
