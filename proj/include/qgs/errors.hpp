#ifndef QGS_ERRORS_HPP
#define QGS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qgs {

// Invalid inputs: bad graph descriptions, malformed files, violated
// preconditions that the caller controls.
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures inside a solver: singular systems, non-convergent
// fits, evaluation at an excluded point.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qgs

#endif  // QGS_ERRORS_HPP
