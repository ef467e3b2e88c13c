#ifndef YFS_ERRORS_HPP
#define YFS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace yfs {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameter outside the mathematical domain (N < 3, beta <= 0, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// beta < beta0: characteristic roots are complex, profiles oscillate around
// the cylinder and none of the tail machinery applies.
struct OscillatoryRegime : Error {
    explicit OscillatoryRegime(const std::string& msg) : Error(msg) {}
};

// beta == beta0 exactly: gamma1 == gamma2, the two-mode decomposition degenerates.
struct DegenerateRoots : Error {
    explicit DegenerateRoots(const std::string& msg) : Error(msg) {}
};

// Requested parameter regime is empty (e.g. weighted contraction at N == 6,
// where beta0 == beta1).
struct EmptyRegime : Error {
    explicit EmptyRegime(const std::string& msg) : Error(msg) {}
};

// Profile ODE integration failed to produce the requested orbit.
struct ShootingFailure : Error {
    explicit ShootingFailure(const std::string& msg) : Error(msg) {}
};

// Phase-plane orbit did not reach a recognizable endpoint.
struct OrbitError : Error {
    explicit OrbitError(const std::string& msg) : Error(msg) {}
};

// Tail-fit window is unusable (sign change inside the window after shrinking,
// or too few samples).
struct WindowError : Error {
    explicit WindowError(const std::string& msg) : Error(msg) {}
};

// Operation is well defined but not for this input (e.g. slow-mode amplitude
// check at beta == beta1 where A1 == 0).
struct NotApplicable : Error {
    explicit NotApplicable(const std::string& msg) : Error(msg) {}
};

// Initial data construction failed validation.
struct ConstructionError : Error {
    explicit ConstructionError(const std::string& msg) : Error(msg) {}
};

// Implicit time step failed (Newton did not converge after dt reductions).
struct StepError : Error {
    explicit StepError(const std::string& msg) : Error(msg) {}
};

// A measurement could not be resolved from the available data.
struct Inconclusive : Error {
    explicit Inconclusive(const std::string& msg) : Error(msg) {}
};

} // namespace yfs

#endif
