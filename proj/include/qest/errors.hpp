#pragma once

#include <stdexcept>
#include <string>

namespace qest {

// Bad or malformed input: schema violations, broken state invariants,
// out-of-contract arguments. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input on which the numerics cannot proceed: singular states,
// degenerate spectra, quadrature failures. The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qest
