#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace isoperi {

// Invalid user-supplied data: bad dimensions, malformed files, out-of-range
// parameters. CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Numerical failure of an otherwise well-posed request: projection
// non-convergence, rank-deficient constraint systems, finite-difference
// breakdown. CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Rank-deficient constraint Jacobian; carries the planes implicated in the
// deficiency (as "i,j" strings) so callers can report which constraints
// degenerated.
class DegeneracyError : public NumericalError {
public:
    DegeneracyError(std::string msg, std::vector<std::string> planes)
        : NumericalError(std::move(msg)), deficient_planes(std::move(planes)) {}
    std::vector<std::string> deficient_planes;
};

} // namespace isoperi
