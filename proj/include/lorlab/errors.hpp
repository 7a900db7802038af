#ifndef LORLAB_ERRORS_HPP
#define LORLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lorlab {

// Base class for all laboratory errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define LORLAB_DEFINE_ERROR(Name)                                   \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

// metric / curvature
LORLAB_DEFINE_ERROR(InterfaceTooClose);
LORLAB_DEFINE_ERROR(DegenerateMetric);
LORLAB_DEFINE_ERROR(ZeroVector);
LORLAB_DEFINE_ERROR(BadFrame);
LORLAB_DEFINE_ERROR(EmptyRegion);

// mollification
LORLAB_DEFINE_ERROR(PaddingViolation);
LORLAB_DEFINE_ERROR(SignatureLost);

// geodesics
LORLAB_DEFINE_ERROR(LeftChart);
LORLAB_DEFINE_ERROR(StepUnderflow);
LORLAB_DEFINE_ERROR(EventLoop);
LORLAB_DEFINE_ERROR(BadSeed);

// congruence
LORLAB_DEFINE_ERROR(RankDeficientData);
LORLAB_DEFINE_ERROR(BranchViolation);
LORLAB_DEFINE_ERROR(HypothesisViolated);
LORLAB_DEFINE_ERROR(BlowUp);
LORLAB_DEFINE_ERROR(ConjugateInWindow);

// submanifolds
LORLAB_DEFINE_ERROR(NotTangent);
LORLAB_DEFINE_ERROR(NotTrappedDirection);
LORLAB_DEFINE_ERROR(BoundaryViolated);
LORLAB_DEFINE_ERROR(ConjugateBeforeSlice);

// causal 1+1
LORLAB_DEFINE_ERROR(Unreachable);
LORLAB_DEFINE_ERROR(ShootingFailed);

// scenario runner
LORLAB_DEFINE_ERROR(ConfigInvalid);
LORLAB_DEFINE_ERROR(ExperimentFailed);
LORLAB_DEFINE_ERROR(SchemaMismatch);

#undef LORLAB_DEFINE_ERROR

} // namespace lorlab

#endif
