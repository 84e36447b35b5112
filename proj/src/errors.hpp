#pragma once

#include <stdexcept>
#include <string>

namespace lawson {

// Error taxonomy; the CLI maps each class to a distinct exit code.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergence : std::runtime_error {
    double closest_approach;
    NonConvergence(const std::string& msg, double closest)
        : std::runtime_error(msg), closest_approach(closest) {}
};
struct ReconstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FitAmbiguous : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PositivityViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularQuadrature : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OrthogonalityViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LogDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegimeFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NewtonDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OrderingLost : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverlapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExpansionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SubcriticalLambda : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PositiveValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lawson
