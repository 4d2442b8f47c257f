#ifndef TORIBIF_ERRORS_HPP
#define TORIBIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace toribif {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error("precondition: " + msg) {}
};

// A state value left the admissible range during integration.
struct DivergenceError : Error {
    double t;
    double value;
    DivergenceError(double t_, double value_)
        : Error("divergence at t=" + std::to_string(t_)), t(t_), value(value_) {}
};

struct AlignmentError : Error {
    explicit AlignmentError(const std::string& msg) : Error("grid alignment: " + msg) {}
};

struct InsufficientHistoryError : Error {
    explicit InsufficientHistoryError(const std::string& msg) : Error("insufficient history: " + msg) {}
};

struct NoConvergenceError : Error {
    double residual;
    NoConvergenceError(const std::string& msg, double residual_)
        : Error("no convergence: " + msg), residual(residual_) {}
};

struct SingularityError : Error {
    explicit SingularityError(const std::string& msg) : Error("singular system: " + msg) {}
};

struct NotApplicableError : Error {
    explicit NotApplicableError(const std::string& msg) : Error("not applicable: " + msg) {}
};

struct NoBracketError : Error {
    explicit NoBracketError(const std::string& msg) : Error("no bracket: " + msg) {}
};

} // namespace toribif

#endif
