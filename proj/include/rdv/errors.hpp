#ifndef RDV_ERRORS_HPP
#define RDV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rdv {

/// Argument outside the domain of an operation (path arc-length, quantile level, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input data violates a structural invariant (map files, configs, datasets).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical routine failed to meet its contract.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rdv

#endif  // RDV_ERRORS_HPP
